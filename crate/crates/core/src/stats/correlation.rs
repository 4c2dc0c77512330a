//! Product-moment and partial correlation with explicit undefined results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::Trace;
use crate::signals::{derive_seed, white_noise, Waveform};
use crate::stats::moments;

/// Residual standard deviation below this fraction of the raw standard
/// deviation means the conditioning set determines the variable.
pub const EPS_DEFINED: f64 = 1e-9;

/// Conditioning columns whose residual norm falls below this fraction of
/// their own norm are linearly dependent on earlier columns and skipped.
const EPS_COLLINEAR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    X,
    Y,
    Both,
}

impl Side {
    fn from_flags(x: bool, y: bool) -> Option<Side> {
        match (x, y) {
            (true, true) => Some(Side::Both),
            (true, false) => Some(Side::X),
            (false, true) => Some(Side::Y),
            (false, false) => None,
        }
    }
}

/// Why a correlation could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "side", rename_all = "snake_case")]
pub enum UndefinedReason {
    /// The series itself is constant.
    ZeroVariance(Side),
    /// The conditioning set fixes the series exactly (zero residual variance).
    Determined(Side),
}

/// A correlation value, or a marker explaining why there is none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corr {
    Value(f64),
    Undefined {
        reason: UndefinedReason,
        /// Value recomputed after adding measurement noise, when requested.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        regularized: Option<f64>,
    },
}

impl Corr {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Corr::Value(v) => Some(v),
            Corr::Undefined { .. } => None,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, Corr::Undefined { .. })
    }

    pub fn regularized(&self) -> Option<f64> {
        match *self {
            Corr::Undefined { regularized, .. } => regularized,
            Corr::Value(_) => None,
        }
    }

    fn undefined(reason: UndefinedReason) -> Self {
        Corr::Undefined {
            reason,
            regularized: None,
        }
    }
}

fn check_aligned(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::invalid("length", "correlation needs at least 3 samples"));
    }
    Ok(())
}

/// Pearson correlation; constant inputs yield `Corr::Undefined`.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<Corr> {
    check_aligned(x, y)?;
    Ok(match moments::pearson(x, y) {
        Some(r) => Corr::Value(r),
        None => {
            let side = Side::from_flags(moments::is_constant(x), moments::is_constant(y))
                .unwrap_or(Side::Both);
            Corr::undefined(UndefinedReason::ZeroVariance(side))
        }
    })
}

fn centered(x: &[f64]) -> Vec<f64> {
    let m = moments::mean(x);
    x.iter().map(|v| v - m).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the components along each (orthonormal) basis vector, twice.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// Orthonormal basis of the centred conditioning columns (modified
/// Gram-Schmidt with re-orthogonalisation); the intercept is handled by
/// centring.
fn orthonormal_basis(given: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(given.len());
    for z in given {
        if moments::is_constant(z) {
            continue;
        }
        let mut v = centered(z);
        let before = norm(&v);
        if before == 0.0 {
            continue;
        }
        project_out(&mut v, &basis);
        let after = norm(&v);
        if after <= EPS_COLLINEAR * before {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= after);
        basis.push(v);
    }
    basis
}

/// Correlation of the least-squares residuals of `x` and `y` after
/// regression on `given` plus an intercept. An empty conditioning set
/// reduces to [`correlation`].
pub fn partial_correlation(x: &[f64], y: &[f64], given: &[&[f64]]) -> Result<Corr> {
    check_aligned(x, y)?;
    for z in given {
        if z.len() != x.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: z.len(),
            });
        }
    }
    if given.is_empty() {
        return correlation(x, y);
    }
    let basis = orthonormal_basis(given);
    let (mut rx, mut ry) = (centered(x), centered(y));
    let (nx, ny) = (norm(&rx), norm(&ry));
    if let Some(side) = Side::from_flags(moments::is_constant(x), moments::is_constant(y)) {
        return Ok(Corr::undefined(UndefinedReason::ZeroVariance(side)));
    }
    project_out(&mut rx, &basis);
    project_out(&mut ry, &basis);
    let (rnx, rny) = (norm(&rx), norm(&ry));
    if let Some(side) = Side::from_flags(rnx <= EPS_DEFINED * nx, rny <= EPS_DEFINED * ny) {
        return Ok(Corr::undefined(UndefinedReason::Determined(side)));
    }
    Ok(Corr::Value((dot(&rx, &ry) / (rnx * rny)).clamp(-1.0, 1.0)))
}

/// Adds independent white Gaussian measurement noise with standard deviation
/// `fraction * sd(channel)` to every channel. Noise for a channel is seeded
/// from `seed` and the channel name, so it is the same whichever other
/// channels the trace carries.
pub fn add_measurement_noise(trace: &Trace, fraction: f64, seed: u64) -> Result<Trace> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::invalid("noise_fraction", "must be >= 0"));
    }
    let mut noisy = trace.clone();
    for (name, w) in trace.channels() {
        let amp = fraction * w.std();
        let noise = white_noise(derive_seed(seed, &format!("measurement/{name}")), w.len());
        let samples = w.samples().iter().zip(&noise).map(|(v, n)| v + amp * n).collect();
        noisy.insert(name, Waveform::new(w.dt(), w.t0(), samples)?)?;
    }
    Ok(noisy)
}
