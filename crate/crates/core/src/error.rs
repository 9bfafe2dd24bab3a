use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time {t} is outside the path domain (horizon {horizon})")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("operation not supported on {0} paths")]
    UnsupportedKind(&'static str),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path is truncated at a finite horizon and is not an element of D")]
    Truncated,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("flow blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("step size underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("mechanism not representable at resolution n = {n}: {reason}")]
    Resolution { n: u64, reason: String },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("insufficient data: got {got}, need {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
