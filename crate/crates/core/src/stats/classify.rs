use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::Trace;
use crate::signals::Waveform;

/// Qualitative grade of a correlation as it would appear in a rounded table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grade", content = "value", rename_all = "snake_case")]
pub enum Class {
    Zero,
    VeryWeak(f64),
    Weak(f64),
    /// Rounded to one decimal.
    Value(f64),
}

impl Class {
    /// Sign of the underlying correlation; zero for `Zero`.
    pub fn sign(&self) -> f64 {
        match *self {
            Class::Zero => 0.0,
            Class::VeryWeak(r) | Class::Weak(r) | Class::Value(r) => r.signum(),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |r: f64| if r < 0.0 { "-" } else { "+" };
        match *self {
            Class::Zero => write!(f, "0"),
            Class::VeryWeak(r) => write!(f, "very weak {}", sign(r)),
            Class::Weak(r) => write!(f, "weak {}", sign(r)),
            Class::Value(r) => write!(f, "{r:.1}"),
        }
    }
}

fn round1(r: f64) -> f64 {
    let v = (r * 10.0).round() / 10.0;
    if v == 0.0 { 0.0 } else { v }
}

/// `|r| < floor` is Zero, below 0.3 Weak, otherwise the value rounded to 0.1.
pub fn classify(r: f64, floor: f64) -> Class {
    let a = r.abs();
    if a < floor {
        Class::Zero
    } else if a < 0.3 {
        Class::Weak(r)
    } else {
        Class::Value(round1(r))
    }
}

/// Three-grade variant: `[floor, 0.2)` very weak, `[0.2, 0.45)` weak.
pub fn classify_graded(r: f64, floor: f64) -> Class {
    let a = r.abs();
    if a < floor {
        Class::Zero
    } else if a < 0.2 {
        Class::VeryWeak(r)
    } else if a < 0.45 {
        Class::Weak(r)
    } else {
        Class::Value(round1(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionRatio {
    Finite(f64),
    /// `R - P` never moves at the sampled resolution.
    Infinite,
}

impl RejectionRatio {
    pub fn value(&self) -> f64 {
        match *self {
            RejectionRatio::Finite(v) => v,
            RejectionRatio::Infinite => f64::INFINITY,
        }
    }
}

/// Disturbance series of a trace: `D`, else `D0 + D1`, else `D_P`.
pub fn disturbance(trace: &Trace) -> Result<Waveform> {
    if trace.has("D") {
        return Ok(trace.channel("D")?.clone());
    }
    if trace.has("D0") && trace.has("D1") {
        return trace.channel("D0")?.zip_with(trace.channel("D1")?, |a, b| a + b);
    }
    Ok(trace.channel("D_P")?.clone())
}

/// `sd(D) / sd(R - P)` over the settled part of the trace. A plant without
/// a reference channel is treated as having `R = 0`.
pub fn rejection_ratio(trace: &Trace) -> Result<RejectionRatio> {
    let t = trace.settled();
    let d = disturbance(&t)?;
    let p = t.channel("P")?;
    let e = if t.has("R") {
        t.channel("R")?.zip_with(p, |r, p| r - p)?
    } else {
        p.map(|p| -p)
    };
    let (sd, se) = (d.std(), e.std());
    match (sd > 0.0, se > 0.0) {
        (_, true) => Ok(RejectionRatio::Finite(sd / se)),
        (true, false) => Ok(RejectionRatio::Infinite),
        (false, false) => Err(Error::Degenerate(
            "neither the disturbance nor R - P varies".into(),
        )),
    }
}

/// Keeps every `interval / dt`-th sample, starting with the first.
pub fn decimate(w: &Waveform, interval: f64) -> Result<Waveform> {
    let dt = w.dt();
    if !(interval.is_finite() && interval >= dt * (1.0 - 1e-9)) {
        return Err(Error::invalid(
            "interval",
            format!("{interval}s is shorter than dt = {dt}s"),
        ));
    }
    let step = (interval / dt).round();
    if ((step * dt) - interval).abs() > 1e-6 * interval {
        return Err(Error::invalid(
            "interval",
            format!("{interval}s is not a multiple of dt = {dt}s"),
        ));
    }
    let samples = w.samples().iter().step_by(step as usize).copied().collect();
    Waveform::new(step * dt, w.t0(), samples)
}
