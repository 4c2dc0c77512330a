//! How far apart two independent smooth signals can drift in correlation
//! over a 1000 s run, compared with white noise of the same length.
//!
//! `cargo run --release --example calibrate -- [runs]`

use faithless::experiments::DEFAULT_SEED;
use faithless::stats::calibrate_significance;

fn main() -> faithless::Result<()> {
    let runs = std::env::args().nth(1).map_or(100, |s| s.parse().expect("runs"));
    let smooth = calibrate_significance(1.0, 1_000_000, 0.001, runs, DEFAULT_SEED)?;
    let white = calibrate_significance(0.002, 1_000_000, 0.001, runs, DEFAULT_SEED)?;
    let fine = calibrate_significance(1.0, 4_000_000, 0.00025, runs, DEFAULT_SEED)?;
    println!("smooth, coherence 1 s:  sd {:.4}  (floor {:.2})", smooth.std_of_null_correlation, smooth.suggested_floor());
    println!("white:                  sd {:.5}", white.std_of_null_correlation);
    println!("smooth, 4x the samples: sd {:.4}", fine.std_of_null_correlation);
    Ok(())
}
