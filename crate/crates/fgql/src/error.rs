use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by model construction, solving, simulation, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "underdetermined pilot: total coefficient count r = {r} must be smaller than the \
         sample size n = {n}"
    )]
    PilotUnderdetermined { r: usize, n: usize },

    #[error("coupling matrix is numerically singular (smallest pivot {pivot:.3e} at index {index})")]
    SingularSystem { pivot: f64, index: usize },

    #[error("no admissible tuning exponent: {0}")]
    InfeasibleSchedule(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
