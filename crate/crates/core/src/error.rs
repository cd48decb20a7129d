use thiserror::Error;

/// Library-wide error type.
///
/// `NumericalFailure` is deliberately separate from infeasibility and
/// unboundedness: it marks an algorithm that gave up (iteration cap, lost
/// pivot, stalled bisection), never a property of the problem itself.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("no verified solutions: {0}")]
    NoSolutions(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code convention: contract and parse errors map to 1,
    /// numerical failures to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalFailure(_) => 2,
            _ => 1,
        }
    }
}
