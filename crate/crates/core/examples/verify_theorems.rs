//! A bounded differentiable signal is uncorrelated with its own
//! derivative once its endpoints match; e^t is the counterexample.

use faithless::signals::{gen_smooth_noise, SmoothNoiseSpec};
use faithless::stats::verify_derivative_theorems;

fn main() -> faithless::Result<()> {
    let w = gen_smooth_noise(&SmoothNoiseSpec {
        coherence_time: 1.0,
        sigma: 1.0,
        seed: 1,
        duration: 1000.0,
        dt: 0.001,
    })?;
    let report = verify_derivative_theorems(&w)?;
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<28} value {:+.3e}  expected {}  tolerance {:.1e}", c.name, c.value, c.expected, c.tolerance);
    }
    Ok(())
}
