//! Test for the controlled variable: disturb a plant and look for variables
//! that fail to move, plus an output that moves against the disturbance.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{simulate, ScenarioSpec, SignalSpec, Trace};
use crate::stats::moments::{is_constant, pearson};

pub const DEFAULT_THRESHOLD: f64 = 10.0;
pub const OPPOSING_CUT: f64 = -0.9;
/// Required ratio of disturbance coherence time to plant settling time.
pub const SPEED_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcvOptions {
    pub disturbance: String,
    pub candidates: Vec<String>,
    pub threshold: f64,
    /// Gain of the declared physical path from the disturbance to each candidate.
    pub open_path_gain: f64,
}

impl TcvOptions {
    pub fn new(disturbance: &str, candidates: &[&str]) -> Self {
        Self {
            disturbance: disturbance.to_string(),
            candidates: candidates.iter().map(|s| s.to_string()).collect(),
            threshold: DEFAULT_THRESHOLD,
            open_path_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opposing {
    pub channel: String,
    pub corr_with_disturbance: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub channel: String,
    pub expected_effect_sigma: f64,
    pub observed_sigma: f64,
    pub stability_ratio: f64,
    /// `None` when the disturbance is too fast for a verdict.
    pub controlled: Option<bool>,
    /// Channels other than the disturbance and this candidate that move
    /// against the disturbance.
    pub opposing: Vec<Opposing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcvReport {
    pub disturbance: String,
    pub threshold: f64,
    pub candidates: Vec<CandidateResult>,
    pub opposing_candidates: Vec<Opposing>,
    pub warnings: Vec<String>,
}

impl TcvReport {
    pub fn candidate(&self, name: &str) -> Option<&CandidateResult> {
        self.candidates.iter().find(|c| c.channel == name)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &CandidateResult> {
        self.candidates.iter().filter(|c| c.controlled == Some(true))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn verdict(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for c in &self.candidates {
            let verdict = match c.controlled {
                Some(true) => "CONTROLLED",
                Some(false) => "not controlled",
                None => "no verdict",
            };
            let ratio = if c.observed_sigma == 0.0 {
                "inf".to_string()
            } else if c.stability_ratio < 1e6 {
                format!("{:.2}", c.stability_ratio)
            } else {
                format!("{:.3e}", c.stability_ratio)
            };
            let _ = write!(
                out,
                "{}: {verdict} (ratio {ratio}, expected sd {:.4}, observed sd {:.4})",
                c.channel, c.expected_effect_sigma, c.observed_sigma
            );
            if c.controlled == Some(true) && !c.opposing.is_empty() {
                let names: Vec<String> = c
                    .opposing
                    .iter()
                    .map(|o| format!("{} (r = {:.3})", o.channel, o.corr_with_disturbance))
                    .collect();
                let _ = write!(out, "; opposed by {}", names.join(", "));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the plant with the disturbance and with it held at zero, then
/// compares each candidate's response with what the open path would
/// transmit.
pub fn run_tcv(plant: &ScenarioSpec, opts: &TcvOptions) -> Result<TcvReport> {
    let dist = plant.input(&opts.disturbance)?.clone();
    if !(opts.threshold > 0.0) {
        return Err(Error::invalid("threshold", "must be positive"));
    }
    if !(opts.open_path_gain > 0.0 && opts.open_path_gain.is_finite()) {
        return Err(Error::invalid("open_path_gain", "must be positive"));
    }
    let mut warnings = Vec::new();
    let settling = plant.settling_time();
    let too_fast = match dist.coherence_time() {
        Some(c) if c < SPEED_MARGIN * settling => {
            warnings.push(format!(
                "disturbance coherence time {c}s is below {SPEED_MARGIN} x the settling time ({settling}s); \
                 the test has little power and gives no verdict"
            ));
            true
        }
        _ => false,
    };
    let mut quiet = plant.clone();
    quiet.inputs.insert(opts.disturbance.clone(), SignalSpec::constant(0.0));
    let runs: Vec<Result<Trace>> = [plant, &quiet].into_par_iter().map(simulate).collect();
    let mut runs = runs.into_iter();
    let with = runs.next().expect("two runs")?.settled();
    let without = runs.next().expect("two runs")?.settled();

    let d = with.channel(&opts.disturbance)?;
    let expected = d.std() * opts.open_path_gain;
    let opposing_all: Vec<Opposing> = with
        .channels()
        .filter(|(name, _)| *name != opts.disturbance)
        .filter_map(|(name, w)| {
            let r = pearson(w.samples(), d.samples())?;
            (r <= OPPOSING_CUT).then(|| Opposing {
                channel: name.to_string(),
                corr_with_disturbance: r,
                sign: -1,
            })
        })
        .collect();

    let mut candidates = Vec::new();
    for name in &opts.candidates {
        if *name == opts.disturbance {
            return Err(Error::invalid("candidates", "the disturbance cannot be a candidate"));
        }
        let candidate = with.channel(name)?;
        let diff = candidate.zip_with(without.channel(name)?, |a, b| a - b)?;
        let observed = diff.std();
        let ratio = expected / observed.max(f64::MIN_POSITIVE);
        let stuck = is_constant(candidate.samples());
        if stuck {
            warnings.push(format!("{name} does not vary in the disturbed run; no verdict"));
        }
        candidates.push(CandidateResult {
            channel: name.clone(),
            expected_effect_sigma: expected,
            observed_sigma: observed,
            stability_ratio: ratio,
            controlled: (!too_fast && !stuck).then_some(ratio >= opts.threshold),
            opposing: opposing_all.iter().filter(|o| o.channel != *name).cloned().collect(),
        });
    }
    Ok(TcvReport {
        disturbance: opts.disturbance.clone(),
        threshold: opts.threshold,
        candidates,
        opposing_candidates: opposing_all,
        warnings,
    })
}
