use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{derive_seed, gen_smooth_noise, SmoothNoiseSpec};
use crate::stats::moments;

/// Spread of the correlation between independent smooth-noise pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceCalibration {
    pub coherence_time: f64,
    pub n_steps: usize,
    pub dt: f64,
    pub n_runs: usize,
    pub seed: u64,
    pub std_of_null_correlation: f64,
}

impl SignificanceCalibration {
    /// Two standard deviations, rounded up to a hundredth.
    pub fn suggested_floor(&self) -> f64 {
        (2.0 * self.std_of_null_correlation * 100.0).ceil() / 100.0
    }
}

fn null_correlation(coherence_time: f64, n_steps: usize, dt: f64, seed: u64, run: usize) -> Result<f64> {
    let spec = |label: &str| SmoothNoiseSpec {
        coherence_time,
        sigma: 1.0,
        seed: derive_seed(seed, &format!("calibration/{run}/{label}")),
        duration: (n_steps - 1) as f64 * dt,
        dt,
    };
    let a = gen_smooth_noise(&spec("a"))?;
    let b = gen_smooth_noise(&spec("b"))?;
    moments::pearson(a.samples(), b.samples())
        .ok_or_else(|| Error::Degenerate("constant noise realisation".into()))
}

/// Sample standard deviation of `corr(a, b)` over `n_runs` independent
/// pairs. Runs execute in parallel; each run's seeds depend only on `seed`
/// and the run index.
pub fn calibrate_significance(
    coherence_time: f64,
    n_steps: usize,
    dt: f64,
    n_runs: usize,
    seed: u64,
) -> Result<SignificanceCalibration> {
    if n_runs < 30 {
        return Err(Error::invalid("runs", format!("need at least 30, got {n_runs}")));
    }
    if n_steps < 3 {
        return Err(Error::invalid("n_steps", "need at least 3"));
    }
    let rs = (0..n_runs)
        .into_par_iter()
        .map(|run| null_correlation(coherence_time, n_steps, dt, seed, run))
        .collect::<Result<Vec<f64>>>()?;
    let m = moments::mean(&rs);
    let var = rs.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (rs.len() - 1) as f64;
    Ok(SignificanceCalibration {
        coherence_time,
        n_steps,
        dt,
        n_runs,
        seed,
        std_of_null_correlation: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_spread_is_one_over_root_n() {
        let dt = 0.01;
        let c = calibrate_significance(2.0 * dt, 10_000, dt, 60, 9).unwrap();
        // 1/sqrt(n) = 0.01
        assert!((0.007..0.013).contains(&c.std_of_null_correlation), "{c:?}");
        let again = calibrate_significance(2.0 * dt, 10_000, dt, 60, 9).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn too_few_runs() {
        assert!(calibrate_significance(1.0, 1000, 0.01, 10, 1).is_err());
    }
}
