//! Simulation and analysis of closed-loop control systems whose variables
//! defeat correlation-based causal inference.

pub mod causal;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod plant;
pub mod reference;
pub mod signals;
pub mod stats;
pub mod tcv;

pub use error::{Error, Result};

