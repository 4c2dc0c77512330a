//! Correlation, significance, decimation and mutual information over traces.

mod calibration;
mod classify;
mod correlation;
mod mi;
pub mod moments;
mod report;
mod theorems;

pub use calibration::{calibrate_significance, SignificanceCalibration};
pub use classify::{classify, classify_graded, decimate, disturbance, rejection_ratio, Class, RejectionRatio};
pub use correlation::{
    add_measurement_noise, correlation, partial_correlation, Corr, Side, UndefinedReason, EPS_DEFINED,
};
pub use mi::mutual_information;
pub use report::{ConditionalEntry, CorrelationEngine, CorrelationReport, DEFAULT_FLOOR};
pub use theorems::{
    forward_derivative_correlation, match_endpoints, midpoint_derivative_correlation,
    verify_derivative_theorems, TheoremCheck, TheoremReport,
};
