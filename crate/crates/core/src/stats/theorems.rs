use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{telescoping_sum, Waveform};
use crate::stats::moments::{pearson, std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub name: String,
    pub value: f64,
    /// Largest admissible deviation from `expected`.
    pub tolerance: f64,
    pub expected: f64,
    pub pass: bool,
}

impl TheoremCheck {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            expected,
            pass: (value - expected).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub checks: Vec<TheoremCheck>,
}

impl TheoremReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&TheoremCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Subtracts the straight line through the first and last samples, so the
/// result starts and ends at zero.
pub fn match_endpoints(w: &Waveform) -> Waveform {
    let n = w.len();
    let (a, b) = (w.first(), w.last());
    let span = (n.max(2) - 1) as f64;
    let s = w
        .samples()
        .iter()
        .enumerate()
        .map(|(i, v)| v - (a + (b - a) * i as f64 / span))
        .collect();
    Waveform::new(w.dt(), w.t0(), s).expect("same grid")
}

/// `corr(x_i, (x_{i+1} - x_i) / dt)`: forward-difference pairing.
pub fn forward_derivative_correlation(x: &[f64]) -> Option<f64> {
    let dx: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    pearson(&x[..x.len() - 1], &dx)
}

/// Same, pairing each difference with the midpoint `(x_i + x_{i+1}) / 2`.
pub fn midpoint_derivative_correlation(x: &[f64]) -> Option<f64> {
    let dx: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let mid: Vec<f64> = x.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    pearson(&mid, &dx)
}

/// Checks the zero-correlation property of a bounded signal and its
/// derivative on `w`, plus the exponential counterexample on the same `dt`.
pub fn verify_derivative_theorems(w: &Waveform) -> Result<TheoremReport> {
    if w.len() < 100 {
        return Err(Error::invalid("length", format!("need at least 100 samples, got {}", w.len())));
    }
    let m = match_endpoints(w);
    let x = m.samples();
    let degenerate = || Error::Degenerate("waveform is a straight line".into());
    let dx: Vec<f64> = x.windows(2).map(|p| (p[1] - p[0]) / w.dt()).collect();
    // Forward pairing has a bias of -(dt/2) sd(x') / sd(x); allow twice that.
    let bias = 0.5 * w.dt() * std(&dx) / std(x);
    let forward = forward_derivative_correlation(x).ok_or_else(degenerate)?;
    let midpoint = midpoint_derivative_correlation(x).ok_or_else(degenerate)?;

    let e = Waveform::from_fn(w.dt(), 0.0, (5.0 / w.dt()).round() as usize + 1, f64::exp)?;
    let exp = forward_derivative_correlation(e.samples()).ok_or_else(degenerate)?;

    let raw = w.samples();
    let tele = telescoping_sum(raw);
    let exact = raw[raw.len() - 1].powi(2) - raw[0].powi(2);
    let scale: f64 = raw.windows(2).map(|p| ((p[0] + p[1]) * (p[1] - p[0])).abs()).sum();

    Ok(TheoremReport {
        checks: vec![
            TheoremCheck::new("endpoint_matched_forward", forward, 0.0, 2.0 * bias + 1e-9),
            TheoremCheck::new("endpoint_matched_midpoint", midpoint, 0.0, 1e-9),
            TheoremCheck::new("exponential_counterexample", exp, 1.0, 1e-6),
            TheoremCheck::new("telescoping", tele - exact, 0.0, 1e-12 * scale.max(f64::MIN_POSITIVE)),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_smooth_noise, SmoothNoiseSpec};

    #[test]
    fn smooth_noise_satisfies_all_checks() {
        let w = gen_smooth_noise(&SmoothNoiseSpec {
            coherence_time: 1.0,
            sigma: 1.0,
            seed: 4,
            duration: 100.0,
            dt: 0.001,
        })
        .unwrap();
        let r = verify_derivative_theorems(&w).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.check("endpoint_matched_forward").unwrap().value.abs() < 0.02);
    }

    #[test]
    fn sine_over_whole_periods() {
        let dt = 0.001;
        let n = (4.0 * std::f64::consts::TAU / dt).round() as usize;
        let x: Vec<f64> = (0..=n).map(|i| (i as f64 * std::f64::consts::TAU * 4.0 / n as f64).sin()).collect();
        assert!(midpoint_derivative_correlation(&x).unwrap().abs() < 1e-6);
    }

    #[test]
    fn endpoints_are_matched() {
        let w = Waveform::from_fn(0.1, 0.0, 200, |t| t * t + t.sin()).unwrap();
        let m = match_endpoints(&w);
        assert!(m.first().abs() < 1e-12 && m.last().abs() < 1e-9);
        assert!(verify_derivative_theorems(&Waveform::from_fn(0.1, 0.0, 50, |t| t).unwrap()).is_err());
    }
}
