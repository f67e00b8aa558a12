use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid piecewise function: {0}")]
    InvalidFunction(String),
    #[error("unsupported test function: {0}")]
    UnsupportedTest(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
