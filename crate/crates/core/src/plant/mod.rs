//! Fixed-step simulation of the feedback loops, the capacitor, the passive
//! equilibrium and the feedforward controller.
//!
//! Every simulator is explicit forward Euler on the scenario's `dt` with no
//! adaptive stepping, so a [`ScenarioSpec`] (seeds included) always maps to
//! the same [`Trace`].

mod models;
mod scenario;
mod trace;

pub use models::{
    calibrate_d_o_sigma, simulate, simulate_capacitor, simulate_feedforward, simulate_integral,
    simulate_passive_equilibrium, simulate_proportional, simulate_split_disturbance,
    INSTABILITY_FACTOR,
};
pub use scenario::{ModelKind, ScenarioSpec, SignalSpec};
pub use trace::{format_f64, Trace};
