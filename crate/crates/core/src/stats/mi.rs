use crate::error::{Error, Result};

fn bin_indices(x: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Degenerate("mutual information of a constant series".into()));
    }
    let scale = n_bins as f64 / (hi - lo);
    Ok(x.iter()
        .map(|&v| (((v - lo) * scale) as usize).min(n_bins - 1))
        .collect())
}

/// Plug-in mutual information in nats from an equal-width `n_bins` x
/// `n_bins` histogram spanning each series' range. No bias correction.
pub fn mutual_information(x: &[f64], y: &[f64], n_bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 1000 {
        return Err(Error::invalid("length", format!("need at least 1000 samples, got {}", x.len())));
    }
    if n_bins < 8 {
        return Err(Error::invalid("n_bins", format!("need at least 8, got {n_bins}")));
    }
    let (bx, by) = (bin_indices(x, n_bins)?, bin_indices(y, n_bins)?);
    let mut joint = vec![0usize; n_bins * n_bins];
    let mut px = vec![0usize; n_bins];
    let mut py = vec![0usize; n_bins];
    for (&i, &j) in bx.iter().zip(&by) {
        joint[i * n_bins + j] += 1;
        px[i] += 1;
        py[j] += 1;
    }
    let n = x.len() as f64;
    let mut mi = 0.0;
    for i in 0..n_bins {
        for j in 0..n_bins {
            let c = joint[i * n_bins + j];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (px[i] as f64 * py[j] as f64)).ln();
        }
    }
    Ok(mi.max(0.0))
}
