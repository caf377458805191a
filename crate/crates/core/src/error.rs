//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An instance is structurally invalid (bad indices, duplicate variables, ...).
    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    /// The cost function is identically zero or has `E* >= 0`.
    #[error("degenerate cost function: {0}")]
    Degenerate(String),

    /// The requested size exceeds a hard cap of the chosen method.
    #[error("n = {n} exceeds the limit {limit} for {what}")]
    TooLarge { n: usize, limit: usize, what: &'static str },

    /// The reduction or operation does not support this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The iterative eigensolver stopped before reaching its tolerance.
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// Preconditions of a closed-form bound are violated.
    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    /// A check requires verified spectral conditions that do not hold.
    #[error("conditions not verified: {0}")]
    Unverified(String),

    /// A jump's success probability fell below the assumed lower bound `p`.
    #[error("jump assumption violated: success probability {success:e} < p = {p:e}")]
    JumpAssumption { success: f64, p: f64 },

    /// A root-finding or search procedure found no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Serialized data could not be interpreted.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
