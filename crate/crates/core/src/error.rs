use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec, config or argument failed validation.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    /// A simulated channel left the admissible range.
    #[error("numerical instability: channel {channel} reached {value:e} at t={time}s (limit {limit:e})")]
    Instability {
        channel: String,
        time: f64,
        value: f64,
        limit: f64,
    },

    /// The operation needs variation that the input does not have.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The operation is not defined for this kind of input (e.g. d-separation on a cyclic graph).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unknown channel {0:?}")]
    UnknownChannel(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
