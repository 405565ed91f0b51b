use thiserror::Error;

/// Failure while evaluating an objective at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// An exponent `w_j + (Bx)_j` exceeded the overflow guard.
    #[error("exponent {value} at reaction column {index} exceeds the overflow guard {limit}")]
    Overflow { index: usize, value: f64, limit: f64 },
    /// A value, gradient or Hessian contained NaN or an infinity.
    #[error("non-finite {what} encountered")]
    NonFinite { what: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Rejected solver or problem configuration.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {field}: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub(crate) fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// Failure of a single solver step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("inner solver failed: {0}")]
    Numerical(String),
    #[error("line search failed after {trials} trials")]
    LineSearch { trials: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}
