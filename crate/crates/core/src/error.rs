use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `TheoremViolation` and `InternalConsistency` indicate a bug (or a case where
/// a mathematical guarantee failed on the sampled data); everything else is an
/// input problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {0} is not a grid point")]
    NotOnGrid(String),

    #[error("function is not proper (no finite grid value)")]
    Improper,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("post-verification failed: {0}")]
    VerificationFailed(String),

    #[error("no admissible point: {0}")]
    NoAdmissiblePoint(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
