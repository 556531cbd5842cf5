use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the range where a quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Factorization breakdown, non-convergence, or a cross-check mismatch.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
