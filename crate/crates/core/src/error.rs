use thiserror::Error;

/// Errors raised by the simulator and its analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("channel error: {0}")]
    Channel(String),

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("rank-deficient input set (smallest singular value {0:.3e})")]
    RankDeficient(f64),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("output collision at {slot}: lines {first} and {second}")]
    Collision { slot: String, first: usize, second: usize },

    #[error("timing error: {0}")]
    Timing(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("execution error: {0}")]
    Execution(String),

    #[error("reporting error: {0}")]
    Reporting(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
