//! A capacitor driven by smooth noise: current and voltage are
//! uncorrelated, and once sampled coarsely they look independent.
//!
//! `cargo run --release --example figure1 -- [out_dir]`

use std::fs::File;
use std::path::PathBuf;

use faithless::experiments::{figure1, write_columns, DEFAULT_SEED};

fn main() -> faithless::Result<()> {
    let fig = figure1(DEFAULT_SEED, 2.0)?;
    println!("C = {:.4}, sd(V) = {:.4}, sd(I) = {:.4}", fig.capacitance, fig.sd_v, fig.sd_i);
    println!("corr(V,I): dense {:+.4}, every {} s {:+.4}", fig.corr_dense, fig.interval, fig.corr_decimated);
    println!("MI(I, next slope): dense {:.3} nats, decimated {:.4} nats", fig.mi_dense, fig.mi_decimated);
    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        for (name, header, cols) in &fig.panels {
            write_columns(File::create(dir.join(format!("{name}.csv")))?, header, cols)?;
        }
        println!("panels written to {}", dir.display());
    }
    Ok(())
}
