//! Causal graph of each loop next to the correlations it produces, and the
//! skeleton a constraint-based search would learn from them.
//!
//! `cargo run --release --example discover -- [scenario]`

use faithless::causal::DEFAULT_MAX_COND;
use faithless::experiments::{discover, scenario, DEFAULT_SEED};
use faithless::plant::simulate;
use faithless::stats::DEFAULT_FLOOR;

fn main() -> faithless::Result<()> {
    let names: Vec<String> = match std::env::args().nth(1) {
        Some(n) => vec![n],
        None => ["example1", "example2", "example4"].map(String::from).to_vec(),
    };
    for name in names {
        let trace = simulate(&scenario(&name, DEFAULT_SEED)?)?;
        let d = discover(&trace, DEFAULT_FLOOR, DEFAULT_MAX_COND)?;
        println!("== {name}\n{}", d.diagram);
        for s in &d.faithfulness.causation_without_correlation {
            println!("  {} -> {} but |r| = {:.3}", s.from, s.to, s.abs_r);
        }
        println!();
    }
    Ok(())
}
