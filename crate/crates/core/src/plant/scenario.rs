use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{self, derive_seed, SmoothNoiseSpec, Waveform};

/// The dynamical systems that can be simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `dO/dt = k (R - P)`, `P(t) = O(t - lag) + D(t)`.
    IntegralLoop,
    /// The integral loop with `D = D0 + D1`, only `D0` observable.
    SplitDisturbanceLoop,
    /// `O = k (R - P)`, `P = D_P + integral(O + D_O)`.
    ProportionalLoop,
    /// `I = C dV/dt`.
    Capacitor,
    /// Over-damped ball in a bowl: `tau dP/dt = -P + D / kappa`.
    PassiveEquilibrium,
    /// Proportional-loop environment driven by `O = -(D_O + bias)`, never looking at `P`.
    FeedforwardLoop,
}

impl ModelKind {
    pub fn required_inputs(self) -> &'static [&'static str] {
        match self {
            ModelKind::IntegralLoop => &["R", "D"],
            ModelKind::SplitDisturbanceLoop => &["R", "D0", "D1"],
            ModelKind::ProportionalLoop | ModelKind::FeedforwardLoop => &["R", "D_O", "D_P"],
            ModelKind::Capacitor => &["V"],
            ModelKind::PassiveEquilibrium => &["D"],
        }
    }

    /// Keys accepted in `initial_state`.
    pub fn state_keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::IntegralLoop | ModelKind::SplitDisturbanceLoop => &["O"],
            ModelKind::ProportionalLoop | ModelKind::FeedforwardLoop => &["X"],
            ModelKind::PassiveEquilibrium => &["P"],
            ModelKind::Capacitor => &[],
        }
    }
}

/// How an exogenous input channel is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Constant {
        value: f64,
    },
    Step {
        t_step: f64,
        before: f64,
        after: f64,
    },
    SmoothNoise {
        coherence_time: f64,
        sigma: f64,
        /// Defaults to a seed derived from the scenario seed and the channel name.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Sine {
        amplitude: f64,
        angular_frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Ramp {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
}

impl SignalSpec {
    pub fn smooth(coherence_time: f64, sigma: f64) -> Self {
        SignalSpec::SmoothNoise {
            coherence_time,
            sigma,
            seed: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        SignalSpec::Constant { value }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            SignalSpec::Constant { .. } => true,
            SignalSpec::SmoothNoise { sigma, .. } => *sigma == 0.0,
            SignalSpec::Step { before, after, .. } => before == after,
            SignalSpec::Sine { amplitude, .. } => *amplitude == 0.0,
            SignalSpec::Ramp { slope, .. } => *slope == 0.0,
        }
    }

    pub fn coherence_time(&self) -> Option<f64> {
        match self {
            SignalSpec::SmoothNoise { coherence_time, .. } => Some(*coherence_time),
            _ => None,
        }
    }

    /// Samples the signal on `len` points spaced `dt` apart starting at `t = 0`.
    pub fn realize(&self, channel: &str, scenario_seed: u64, len: usize, dt: f64) -> Result<Waveform> {
        let duration = dt * (len - 1) as f64;
        match *self {
            SignalSpec::Constant { value } => Waveform::new(dt, 0.0, vec![value; len]),
            SignalSpec::Step {
                t_step,
                before,
                after,
            } => signals::gen_step(t_step, before, after, duration, dt),
            SignalSpec::SmoothNoise {
                coherence_time,
                sigma,
                seed,
            } => {
                let w = signals::gen_smooth_noise(&SmoothNoiseSpec {
                    coherence_time,
                    sigma,
                    seed: seed.unwrap_or_else(|| derive_seed(scenario_seed, channel)),
                    duration,
                    dt,
                })
                .map_err(|e| match e {
                    Error::Invalid { field, message } => {
                        Error::invalid(format!("inputs.{channel}.{field}"), message)
                    }
                    other => other,
                })?;
                debug_assert_eq!(w.len(), len);
                Ok(w)
            }
            SignalSpec::Sine {
                amplitude,
                angular_frequency,
                phase,
            } => Waveform::from_fn(dt, 0.0, len, |t| {
                amplitude * (angular_frequency * t + phase).sin()
            }),
            SignalSpec::Ramp { slope, intercept } => {
                Waveform::from_fn(dt, 0.0, len, |t| intercept + slope * t)
            }
        }
    }
}

fn default_true() -> bool {
    true
}

/// Complete, serialisable description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub model: ModelKind,
    /// Controller gain `k`.
    #[serde(default)]
    pub gain: f64,
    /// Transport lag in seconds; must be a multiple of `dt`.
    #[serde(default)]
    pub lag: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Base seed for noise inputs that do not carry their own.
    #[serde(default)]
    pub seed: u64,
    pub inputs: BTreeMap<String, SignalSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_state: BTreeMap<String, f64>,
    /// Passive equilibrium relaxation time `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_constant: Option<f64>,
    /// Passive equilibrium spring constant `kappa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<f64>,
    /// Feedforward measurement bias on `D_O`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    /// Capacitor `C`; chosen so that `sd(I) = sd(V)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitance: Option<f64>,
    /// Rescale `D_O` so it produces the same error amplitude as `D_P` (proportional loop).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub calibrate_d_o: bool,
    /// Drop the first five settling times before computing statistics.
    #[serde(default = "default_true")]
    pub discard_transient: bool,
}

impl ScenarioSpec {
    pub fn new(model: ModelKind, dt: f64, n_steps: usize) -> Self {
        Self {
            model,
            gain: 0.0,
            lag: 0.0,
            dt,
            n_steps,
            seed: 0,
            inputs: BTreeMap::new(),
            initial_state: BTreeMap::new(),
            time_constant: None,
            stiffness: None,
            bias: None,
            capacitance: None,
            calibrate_d_o: false,
            discard_transient: true,
        }
    }

    pub fn with_gain(mut self, k: f64) -> Self {
        self.gain = k;
        self
    }

    pub fn with_lag(mut self, lag: f64) -> Self {
        self.lag = lag;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_input(mut self, channel: &str, signal: SignalSpec) -> Self {
        self.inputs.insert(channel.to_string(), signal);
        self
    }

    pub fn with_initial(mut self, key: &str, value: f64) -> Self {
        self.initial_state.insert(key.to_string(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.n_steps.saturating_sub(1)) as f64
    }

    /// Lag expressed in samples.
    pub fn lag_steps(&self) -> Result<usize> {
        signals::lag_in_samples(self.lag, self.dt)
    }

    /// Characteristic response time of the system (seconds).
    pub fn settling_time(&self) -> f64 {
        match self.model {
            ModelKind::IntegralLoop
            | ModelKind::SplitDisturbanceLoop
            | ModelKind::ProportionalLoop => {
                if self.gain > 0.0 {
                    1.0 / self.gain + self.lag
                } else {
                    0.0
                }
            }
            ModelKind::PassiveEquilibrium => self.time_constant.unwrap_or(0.0),
            ModelKind::Capacitor | ModelKind::FeedforwardLoop => 0.0,
        }
    }

    /// Samples dropped at the start of a trace before computing statistics.
    pub fn warmup_samples(&self) -> usize {
        if !self.discard_transient {
            return 0;
        }
        let w = (5.0 * self.settling_time() / self.dt - 1e-9).ceil().max(0.0) as usize;
        w.min(self.n_steps.saturating_sub(3))
    }

    pub fn input(&self, channel: &str) -> Result<&SignalSpec> {
        self.inputs
            .get(channel)
            .ok_or_else(|| Error::invalid(format!("inputs.{channel}"), "missing"))
    }

    pub fn initial(&self, key: &str) -> f64 {
        self.initial_state.get(key).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.n_steps < 3 {
            return Err(Error::invalid("n_steps", "must be at least 3"));
        }
        if !self.gain.is_finite() || self.gain < 0.0 {
            return Err(Error::invalid("gain", format!("must be >= 0, got {}", self.gain)));
        }
        self.lag_steps().map_err(|e| match e {
            Error::Invalid { message, .. } => Error::invalid("lag", message),
            other => other,
        })?;
        let required = self.model.required_inputs();
        for name in required {
            self.input(name)?;
        }
        for name in self.inputs.keys() {
            if !required.contains(&name.as_str()) {
                return Err(Error::invalid(
                    format!("inputs.{name}"),
                    format!("not an input of {:?} (expected {:?})", self.model, required),
                ));
            }
        }
        for key in self.initial_state.keys() {
            if !self.model.state_keys().contains(&key.as_str()) {
                return Err(Error::invalid(
                    format!("initial_state.{key}"),
                    format!("not a state of {:?}", self.model),
                ));
            }
        }
        for (name, sig) in &self.inputs {
            if let SignalSpec::SmoothNoise { coherence_time, sigma, .. } = sig {
                SmoothNoiseSpec {
                    coherence_time: *coherence_time,
                    sigma: *sigma,
                    seed: 0,
                    duration: self.duration(),
                    dt: self.dt,
                }
                .validate()
                .map_err(|e| match e {
                    Error::Invalid { field, message } => {
                        Error::invalid(format!("inputs.{name}.{field}"), message)
                    }
                    other => other,
                })?;
            }
        }
        match self.model {
            ModelKind::PassiveEquilibrium => {
                for (field, v) in [("time_constant", self.time_constant), ("stiffness", self.stiffness)] {
                    match v {
                        Some(x) if x > 0.0 && x.is_finite() => {}
                        _ => return Err(Error::invalid(field, "must be given and positive")),
                    }
                }
            }
            ModelKind::Capacitor => {
                if let Some(c) = self.capacitance {
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(Error::invalid("capacitance", "must be positive"));
                    }
                }
            }
            ModelKind::ProportionalLoop if self.calibrate_d_o => {
                if !matches!(self.inputs.get("D_O"), Some(SignalSpec::SmoothNoise { .. })) {
                    return Err(Error::invalid(
                        "calibrate_d_o",
                        "needs D_O to be smooth noise",
                    ));
                }
            }
            _ => {}
        }
        if self.calibrate_d_o && self.model != ModelKind::ProportionalLoop {
            return Err(Error::invalid(
                "calibrate_d_o",
                "only applies to the proportional loop",
            ));
        }
        if matches!(self.model, ModelKind::IntegralLoop | ModelKind::SplitDisturbanceLoop)
            && self.gain * self.lag >= 1.0
        {
            log::warn!(
                "k*lag = {} >= 1: the integral loop is expected to be unstable",
                self.gain * self.lag
            );
        }
        Ok(())
    }
}
