use thiserror::Error;

/// Errors raised by the representation builders, the structured algorithms and
/// the identification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (breakdown at index {index})")]
    NotPositiveDefinite { index: usize },

    #[error("diagonal entry {index} must be strictly positive")]
    DegenerateDiagonal { index: usize },

    #[error("Y^T W - I is numerically singular (condition estimate {cond:.3e})")]
    SingularYW { cond: f64 },

    #[error("near-degenerate exponent {name} = {value:.3e}")]
    NearDegenerateExponent { name: &'static str, value: f64 },

    #[error("every grid evaluation failed")]
    AllEvaluationsFailed,

    #[error("reference impulse response is constant; model fit is undefined")]
    DegenerateReference,

    #[error("problem size {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
