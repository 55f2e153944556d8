use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { got: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coordinate {value} of point {point} (axis {axis}) is outside [0, 1]")]
    CoordinateOutOfRange { point: usize, axis: usize, value: f64 },

    #[error("instance too large: {reason}")]
    InstanceTooLarge { reason: String },

    #[error("estimated {what} of {estimate_bytes} bytes exceeds the budget of {budget_bytes} bytes")]
    BudgetExceeded {
        what: &'static str,
        estimate_bytes: u128,
        budget_bytes: u128,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("search cap of n = {cap} reached without success fraction {target}; trace (n, fraction): {trace:?}")]
    SearchCapExceeded {
        cap: usize,
        target: f64,
        trace: Vec<(usize, f64)>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
