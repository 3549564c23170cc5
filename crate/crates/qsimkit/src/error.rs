use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },
    #[error("register of {0} qubits exceeds the limit of {1}")]
    TooLarge(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("operator is not unitary: {0}")]
    NotUnitary(String),
    #[error("algebra error: {0}")]
    Algebra(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QsimError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(QsimError::InvalidArgument(msg.into()))
}
