//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
