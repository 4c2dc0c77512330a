//! The same skeleton search on random linear-Gaussian DAGs, where the
//! data are faithful and it recovers the graph.

use faithless::experiments::{positive_control, DEFAULT_SEED};
use faithless::stats::DEFAULT_FLOOR;

fn main() -> faithless::Result<()> {
    let runs = positive_control(20, 6, 5000, DEFAULT_SEED, DEFAULT_FLOOR)?;
    for r in &runs {
        println!("seed {:>20}  F1 {:.3}  faithful {}", r.seed, r.f1, r.faithful);
    }
    let mean = runs.iter().map(|r| r.f1).sum::<f64>() / runs.len() as f64;
    println!("mean F1 {mean:.3}");
    Ok(())
}
