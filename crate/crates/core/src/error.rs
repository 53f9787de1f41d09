use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient samples: need at least {required}, got {found}")]
    InsufficientSamples { required: usize, found: usize },

    /// A template is outside the admissible set (unit diagonal, nonnegative, symmetric).
    #[error("template `{label}` rejected at entries {offending:?}: {reason}")]
    TemplateRejected {
        label: String,
        reason: &'static str,
        offending: Vec<(usize, usize)>,
    },

    #[error("variable {variable} has zero variance")]
    ZeroVariance { variable: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The requested statistic is not available (or ill-posed) for this sampling regime.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Two algebraically equivalent evaluations disagree. Signals a formula bug.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}
