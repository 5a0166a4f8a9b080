use thiserror::Error;

/// Errors raised by constructors, solvers and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate metric: {0}")]
    Degenerate(String),
    #[error("unsupported resolution: {0}")]
    Resolution(String),
    #[error("grid alignment mismatch: {0}")]
    Alignment(String),
    #[error("numerical failure: {msg} (residual {residual:e})")]
    Numerical { msg: String, residual: f64 },
    #[error("refused: {0}")]
    Refused(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical { msg: msg.into(), residual }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
