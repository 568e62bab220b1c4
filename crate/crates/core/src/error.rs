use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed bond: {0}")]
    MalformedBond(String),

    #[error("contingency table too sparse (smallest expected count {min_expected:.3} < 5); raise the number of trials")]
    SparseTable { min_expected: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "bracket does not straddle the threshold {threshold}: proxy({low}) = {low_estimate:.4}, proxy({high}) = {high_estimate:.4}"
    )]
    NonStraddlingBracket {
        threshold: f64,
        low: f64,
        high: f64,
        low_estimate: f64,
        high_estimate: f64,
    },

    #[error(
        "trial escalation exhausted at parameter {parameter} with {trials} trials: estimate {estimate:.4} still within CI of threshold"
    )]
    EscalationExhausted {
        parameter: f64,
        trials: u64,
        estimate: f64,
    },

    #[error("event file: {0}")]
    EventFile(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
