use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::ScenarioSpec;
use crate::signals::Waveform;

/// Named, sample-aligned channels produced by one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    scenario: ScenarioSpec,
    channels: Vec<(String, Waveform)>,
    /// Standard deviation chosen for `D_O` by the proportional-loop calibration pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibrated_sigma_d_o: Option<f64>,
}

impl Trace {
    pub(crate) fn new(scenario: ScenarioSpec) -> Self {
        Self {
            scenario,
            channels: Vec::new(),
            calibrated_sigma_d_o: None,
        }
    }

    pub(crate) fn set_calibrated_sigma_d_o(&mut self, sigma: f64) {
        self.calibrated_sigma_d_o = Some(sigma);
    }

    pub fn calibrated_sigma_d_o(&self) -> Option<f64> {
        self.calibrated_sigma_d_o
    }

    /// Adds or replaces a channel; it must line up with the existing ones.
    pub fn insert(&mut self, name: &str, w: Waveform) -> Result<()> {
        if let Some((_, first)) = self.channels.first() {
            if first.len() != w.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: w.len(),
                });
            }
        }
        match self.channels.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = w,
            None => self.channels.push((name.to_string(), w)),
        }
        Ok(())
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        &self.scenario
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn has(&self, name: &str) -> bool {
        self.channels.iter().any(|(n, _)| n == name)
    }

    pub fn channel(&self, name: &str) -> Result<&Waveform> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| w)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &Waveform)> {
        self.channels.iter().map(|(n, w)| (n.as_str(), w))
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |(_, w)| w.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt
    }

    /// Copy with the warm-up transient removed (see [`ScenarioSpec::warmup_samples`]).
    pub fn settled(&self) -> Trace {
        let start = self.scenario.warmup_samples().min(self.len().saturating_sub(2));
        if start == 0 {
            return self.clone();
        }
        let end = self.len();
        let mut scenario = self.scenario.clone();
        scenario.discard_transient = false;
        Trace {
            scenario,
            channels: self
                .channels
                .iter()
                .map(|(n, w)| (n.clone(), w.slice(start, end).expect("window inside trace")))
                .collect(),
            calibrated_sigma_d_o: self.calibrated_sigma_d_o,
        }
    }

    /// CSV with a `t` column followed by one column per channel.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<&str> = std::iter::once("t").chain(self.names()).collect();
        writeln!(out, "{}", header.join(","))?;
        let Some((_, first)) = self.channels.first() else {
            return Ok(());
        };
        let mut line = String::new();
        for i in 0..first.len() {
            line.clear();
            line.push_str(&format_f64(first.time_at(i)));
            for (_, w) in &self.channels {
                line.push(',');
                line.push_str(&format_f64(w.samples()[i]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal representation, `.` separator.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:?}")
}
