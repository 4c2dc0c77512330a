//! Integrating control loop driven by a smooth disturbance: the output
//! mirrors the disturbance while the perception it controls stays flat.
//!
//! `cargo run --release --example simulate_loop -- [seed]`

use faithless::experiments::{scenario, DEFAULT_SEED};
use faithless::plant::simulate;
use faithless::stats::{rejection_ratio, CorrelationEngine, DEFAULT_FLOOR};

fn main() -> faithless::Result<()> {
    let seed = std::env::args().nth(1).map_or(DEFAULT_SEED, |s| s.parse().expect("seed"));
    let trace = simulate(&scenario("example1", seed)?)?;
    let engine = CorrelationEngine::from_trace(&trace, &["O", "P", "D"], DEFAULT_FLOOR)?;
    let report = engine.report();
    for (a, b) in [("O", "P"), ("O", "D"), ("P", "D")] {
        println!("corr({a},{b}) = {:+.3}", report.value(a, b)?.unwrap_or(f64::NAN));
    }
    let settled = trace.settled();
    println!("sd(P) = {:.4}, sd(O) = {:.4}", settled.channel("P")?.std(), settled.channel("O")?.std());
    println!("disturbance rejection ratio = {:.1}", rejection_ratio(&trace)?.value());
    Ok(())
}
