use thiserror::Error;

/// Errors raised by model construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid incidence function: {0}")]
    InvalidIncidence(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("set is not admissible: {0}")]
    NotAdmissible(String),

    #[error("no convergence after {iterations} iterations (best estimate {estimate}, residual {residual:e})")]
    Convergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("integration did not settle: {0}")]
    Integration(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
