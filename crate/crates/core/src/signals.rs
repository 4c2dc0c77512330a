//! Uniformly sampled signals: the band-limited noise generator, deterministic
//! inputs (steps, sines, ramps) and their discrete calculus.
//!
//! Smooth noise is white Gaussian noise convolved with the bump function
//! `exp(-1 / (1 - u^2))`, stretched so its support is exactly one coherence
//! time wide. The autocorrelation of the output therefore vanishes for every
//! lag of at least one coherence time. White noise comes from ChaCha8 seeded
//! with the 64-bit seed, mapped to normal deviates by `rand_distr`'s
//! ziggurat sampler; the convolution uses direct summation for short kernels
//! and scalar overlap-save FFT otherwise. Neither path depends on CPU
//! features, so a spec always produces the same samples.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlannerScalar};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::moments;

/// A real time series sampled every `dt` seconds starting at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    dt: f64,
    t0: f64,
    samples: Vec<f64>,
}

impl Waveform {
    pub fn new(dt: f64, t0: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("samples", "waveform needs at least one sample"));
        }
        Ok(Self { dt, t0, samples })
    }

    /// Builds a waveform by evaluating `f` at `t0 + i*dt` for `i in 0..len`.
    pub fn from_fn(dt: f64, t0: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..len).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::new(dt, t0, samples)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `dt * (len - 1)`.
    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn first(&self) -> f64 {
        self.samples[0]
    }

    pub fn last(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        moments::mean(&self.samples)
    }

    /// Population standard deviation (divisor `n`).
    pub fn std(&self) -> f64 {
        moments::std(&self.samples)
    }

    /// Samples `start..end`, with `t0` shifted accordingly.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::invalid(
                "range",
                format!("{start}..{end} outside 0..{}", self.len()),
            ));
        }
        Self::new(self.dt, self.time_at(start), self.samples[start..end].to_vec())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dt: self.dt,
            t0: self.t0,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sample-wise combination of two aligned waveforms.
    pub fn zip_with(&self, other: &Waveform, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self {
            dt: self.dt,
            t0: self.t0,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Parameters of one band-limited Gaussian noise realisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothNoiseSpec {
    /// Width of the smoothing kernel's support, in seconds.
    pub coherence_time: f64,
    pub sigma: f64,
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
}

impl SmoothNoiseSpec {
    /// Number of samples produced: `round(duration / dt) + 1`.
    pub fn len(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(
                "duration",
                format!("must be positive, got {}", self.duration),
            ));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if !(self.coherence_time.is_finite() && self.coherence_time >= 2.0 * self.dt * (1.0 - 1e-9)) {
            return Err(Error::invalid(
                "coherence_time",
                format!(
                    "must be at least 2*dt = {}, got {}",
                    2.0 * self.dt,
                    self.coherence_time
                ),
            ));
        }
        if self.duration < 10.0 * self.coherence_time * (1.0 - 1e-9) {
            return Err(Error::invalid(
                "duration",
                format!(
                    "must be at least 10 coherence times ({}), got {}",
                    10.0 * self.coherence_time,
                    self.duration
                ),
            ));
        }
        Ok(())
    }
}

/// Bump function `exp(-1/(1-u^2))` on `(-1, 1)`, zero elsewhere.
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Smoothing kernel sampled on the grid: taps `j = -w..=w` with weight
/// `bump(2 j dt / coherence_time)`. Taps on the support boundary are zero and
/// are dropped, so `coherence_time == 2 dt` yields the single tap `[1/e]`.
pub fn smoothing_kernel(coherence_time: f64, dt: f64) -> Vec<f64> {
    let half = 0.5 * coherence_time / dt;
    let w = ((half - 1e-9).ceil() as usize).saturating_sub(1);
    (0..=2 * w)
        .map(|m| bump((m as f64 - w as f64) / half))
        .collect()
}

/// Standard normal deviates from a ChaCha8 stream.
pub fn white_noise(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Mixes a base seed with a label into an independent 64-bit seed
/// (FNV-1a of the label, then a SplitMix64 finaliser).
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(base ^ h)
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Band-limited Gaussian noise, rescaled so its population standard
/// deviation is exactly `spec.sigma`.
pub fn gen_smooth_noise(spec: &SmoothNoiseSpec) -> Result<Waveform> {
    spec.validate()?;
    let n = spec.len();
    if spec.sigma == 0.0 {
        return Waveform::new(spec.dt, 0.0, vec![0.0; n]);
    }
    let kernel = smoothing_kernel(spec.coherence_time, spec.dt);
    let w = (kernel.len() - 1) / 2;
    // One coherence time of extra noise on each side; the kept window only
    // ever sees fully overlapped kernel positions.
    let pad = ((spec.coherence_time / spec.dt).round() as usize).max(w);
    let noise = white_noise(spec.seed, n + 2 * pad);
    let mut out = convolve_valid(&noise, &kernel, pad - w, n);
    let sd = moments::std(&out);
    if sd > 0.0 {
        let scale = spec.sigma / sd;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Waveform::new(spec.dt, 0.0, out)
}

/// `out[i] = sum_m kernel[m] * x[offset + i + L - 1 - m]` for `i in 0..n`,
/// i.e. `n` samples of the full linear convolution starting at index
/// `offset + L - 1`.
fn convolve_valid(x: &[f64], kernel: &[f64], offset: usize, n: usize) -> Vec<f64> {
    let l = kernel.len();
    debug_assert!(offset + n + l - 1 <= x.len());
    if l <= 64 {
        return (0..n)
            .map(|i| {
                let base = offset + i + l - 1;
                kernel
                    .iter()
                    .enumerate()
                    .map(|(m, &k)| k * x[base - m])
                    .sum()
            })
            .collect();
    }
    overlap_save(x, kernel, offset, n)
}

fn overlap_save(x: &[f64], kernel: &[f64], offset: usize, n: usize) -> Vec<f64> {
    let l = kernel.len();
    let size = (4 * l).max(8192).next_power_of_two();
    let step = size - l + 1;
    let mut planner = FftPlannerScalar::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);

    let mut h: Vec<Complex<f64>> = kernel.iter().map(|&k| Complex::new(k, 0.0)).collect();
    h.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut h);

    let norm = 1.0 / size as f64;
    let mut out = Vec::with_capacity(n);
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    let mut produced = 0;
    while produced < n {
        // Block input begins L-1 samples before the first output it yields.
        let start = offset + produced;
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(x.get(start + j).copied().unwrap_or(0.0), 0.0);
        }
        fwd.process(&mut buf);
        buf.iter_mut().zip(&h).for_each(|(b, k)| *b *= k);
        inv.process(&mut buf);
        let take = step.min(n - produced);
        out.extend(buf[l - 1..l - 1 + take].iter().map(|c| c.re * norm));
        produced += take;
    }
    out
}

/// `before` for `t < t_step`, `after` from `t_step` on; `duration / dt + 1` samples.
pub fn gen_step(t_step: f64, before: f64, after: f64, duration: f64, dt: f64) -> Result<Waveform> {
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", "must be positive"));
    }
    if !(0.0..=duration).contains(&t_step) {
        return Err(Error::invalid(
            "t_step",
            format!("must lie in [0, {duration}], got {t_step}"),
        ));
    }
    let n = grid_len(duration, dt)?;
    // Compare on the integer grid so t_step = i*dt switches exactly at sample i.
    let switch = (t_step / dt - 1e-9).ceil().max(0.0) as usize;
    Waveform::new(
        dt,
        0.0,
        (0..n).map(|i| if i < switch { before } else { after }).collect(),
    )
}

pub(crate) fn grid_len(duration: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    Ok((duration / dt).round() as usize + 1)
}

/// Forward difference `(w[i+1] - w[i]) / dt`; one sample shorter than `w`.
pub fn differentiate(w: &Waveform) -> Result<Waveform> {
    if w.len() < 2 {
        return Err(Error::Degenerate(
            "differentiation needs at least two samples".into(),
        ));
    }
    let inv = 1.0 / w.dt;
    let d = w.samples.windows(2).map(|p| (p[1] - p[0]) * inv).collect();
    Waveform::new(w.dt, w.t0, d)
}

/// Cumulative forward-Euler sum with `out[0] = initial` and
/// `out[i+1] = out[i] + w[i] * dt`; same length as `w`.
pub fn integrate(w: &Waveform, initial: f64) -> Waveform {
    let mut acc = initial;
    let mut out = Vec::with_capacity(w.len());
    out.push(acc);
    for &v in &w.samples[..w.len() - 1] {
        acc += v * w.dt;
        out.push(acc);
    }
    Waveform {
        dt: w.dt,
        t0: w.t0,
        samples: out,
    }
}

/// Pearson correlation of `w[0..n-k]` with `w[k..n]`, `k = lag / dt`.
pub fn autocorrelation(w: &Waveform, lag: f64) -> Result<f64> {
    let k = lag_in_samples(lag, w.dt)?;
    if lag >= w.duration() / 2.0 && k > 0 {
        return Err(Error::invalid(
            "lag",
            format!("{lag}s is not below half the duration ({}s)", w.duration() / 2.0),
        ));
    }
    let n = w.len();
    let (a, b) = (&w.samples[..n - k], &w.samples[k..]);
    if k == 0 {
        return if moments::variance(a) > 0.0 {
            Ok(1.0)
        } else {
            Err(Error::Degenerate("constant waveform".into()))
        };
    }
    moments::pearson(a, b).ok_or_else(|| Error::Degenerate("constant waveform".into()))
}

pub(crate) fn lag_in_samples(lag: f64, dt: f64) -> Result<usize> {
    if !(lag >= 0.0 && lag.is_finite()) {
        return Err(Error::invalid("lag", format!("must be >= 0, got {lag}")));
    }
    let k = (lag / dt).round();
    if (k * dt - lag).abs() > 1e-9 * lag.max(dt) {
        return Err(Error::invalid(
            "lag",
            format!("{lag}s is not a multiple of dt = {dt}s"),
        ));
    }
    Ok(k as usize)
}

/// `sum_i (x_i + x_{i+1}) (x_{i+1} - x_i)`, which telescopes to `x_N^2 - x_0^2`.
pub fn telescoping_sum(x: &[f64]) -> f64 {
    x.windows(2).map(|p| (p[0] + p[1]) * (p[1] - p[0])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(coherence_time: f64, sigma: f64, seed: u64, duration: f64, dt: f64) -> Waveform {
        gen_smooth_noise(&SmoothNoiseSpec {
            coherence_time,
            sigma,
            seed,
            duration,
            dt,
        })
        .unwrap()
    }

    #[test]
    fn kernel_support_is_one_coherence_time() {
        let k = smoothing_kernel(1.0, 0.001);
        assert_eq!(k.len(), 999);
        assert!(k.iter().all(|&v| v > 0.0));
        assert_eq!(smoothing_kernel(0.002, 0.001).len(), 1);
        assert_eq!(smoothing_kernel(0.1, 0.001).len(), 99);
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let x = white_noise(3, 3000);
        let k = smoothing_kernel(0.2, 0.001);
        let l = k.len();
        let fast = overlap_save(&x, &k, 7, 2000);
        for (i, v) in fast.iter().enumerate() {
            let base = 7 + i + l - 1;
            let direct: f64 = k.iter().enumerate().map(|(m, &kk)| kk * x[base - m]).sum();
            assert!((v - direct).abs() < 1e-12, "{i}: {v} vs {direct}");
        }
    }

    #[test]
    fn smooth_noise_statistics() {
        let w = noise(1.0, 1.0, 11, 1000.0, 0.001);
        assert_eq!(w.len(), 1_000_001);
        assert!((w.std() - 1.0).abs() < 1e-12);
        // Standard error of the mean is ~ sigma * sqrt(int rho / T) ~ 0.02.
        assert!(w.mean().abs() < 3.0 * 0.025, "mean {}", w.mean());
        let r = autocorrelation(&w, 1.0).unwrap();
        assert!(r.abs() < 0.05, "autocorr at one coherence time: {r}");
        assert!(autocorrelation(&w, 0.1).unwrap() > 0.5);
    }

    #[test]
    fn zero_sigma_gives_zeros() {
        let w = noise(1.0, 0.0, 1, 20.0, 0.01);
        assert!(w.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_spec_same_samples() {
        let a = noise(0.5, 2.0, 42, 30.0, 0.001);
        let b = noise(0.5, 2.0, 42, 30.0, 0.001);
        assert_eq!(a, b);
        let c = noise(0.5, 2.0, 43, 30.0, 0.001);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = SmoothNoiseSpec {
            coherence_time: 1.0,
            sigma: 1.0,
            seed: 0,
            duration: 100.0,
            dt: 0.01,
        };
        for bad in [
            SmoothNoiseSpec { dt: 0.0, ..base },
            SmoothNoiseSpec { dt: -1.0, ..base },
            SmoothNoiseSpec { duration: 0.0, ..base },
            SmoothNoiseSpec { coherence_time: 0.015, ..base },
            SmoothNoiseSpec { duration: 5.0, ..base },
        ] {
            assert!(gen_smooth_noise(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn step_edges() {
        let c = gen_step(0.0, 3.0, 3.0, 1.0, 0.1).unwrap();
        assert!(c.samples().iter().all(|&v| v == 3.0));
        let s = gen_step(0.5, 0.0, 1.0, 1.0, 0.1).unwrap();
        assert_eq!(s.samples()[4], 0.0);
        assert_eq!(s.samples()[5], 1.0);
        assert!(gen_step(2.0, 0.0, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn derivative_examples() {
        let c = Waveform::new(0.1, 0.0, vec![2.5; 10]).unwrap();
        assert!(differentiate(&c).unwrap().samples().iter().all(|&v| v == 0.0));

        let ramp = Waveform::from_fn(0.01, 0.0, 500, |t| 3.0 * t - 1.0).unwrap();
        let d = differentiate(&ramp).unwrap();
        assert_eq!(d.len(), 499);
        assert!(d.samples().iter().all(|&v| (v - 3.0).abs() < 1e-9));

        let dt = 0.001;
        let s = Waveform::from_fn(dt, 0.0, 10_000, f64::sin).unwrap();
        let ds = differentiate(&s).unwrap();
        let max_err = ds
            .samples()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (i as f64 * dt).cos()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-3, "max error {max_err}");

        let single = Waveform::new(0.1, 0.0, vec![1.0]).unwrap();
        assert!(differentiate(&single).is_err());
    }

    #[test]
    fn integral_examples() {
        let z = Waveform::new(0.1, 0.0, vec![0.0; 20]).unwrap();
        assert!(integrate(&z, 5.0).samples().iter().all(|&v| v == 5.0));

        let two = gen_step(0.0, 2.0, 2.0, 10.0, 0.001).unwrap();
        let i = integrate(&two, 0.0);
        assert!((i.last() - 20.0).abs() < 1e-9, "{}", i.last());
    }

    #[test]
    fn integrate_inverts_differentiate() {
        let w = noise(0.3, 4.0, 9, 10.0, 0.001);
        let back = integrate(&differentiate(&w).unwrap(), w.first());
        let scale = w.max_abs();
        for (a, b) in back.samples().iter().zip(w.samples()) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn autocorrelation_contract() {
        let w = noise(0.2, 1.0, 5, 20.0, 0.001);
        assert_eq!(autocorrelation(&w, 0.0).unwrap(), 1.0);
        assert!(autocorrelation(&w, 0.0015).is_err());
        assert!(autocorrelation(&w, 10.0).is_err());
    }

    #[test]
    fn white_noise_has_no_memory() {
        // With coherence 2*dt the kernel is a single tap, i.e. white noise.
        let w = noise(0.002, 1.0, 17, 1000.0, 0.001);
        let r = autocorrelation(&w, 0.001).unwrap();
        assert!(r.abs() < 0.01, "{r}");
    }

    #[test]
    fn telescoping_matches_endpoints() {
        let w = noise(0.5, 1.0, 2, 50.0, 0.001);
        let x = w.samples();
        let lhs = telescoping_sum(x);
        let rhs = x[x.len() - 1].powi(2) - x[0].powi(2);
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v * v));
        assert!((lhs - rhs).abs() <= 1e-9 * scale);
    }
}
