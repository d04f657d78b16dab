//! Crate-wide error type.

use thiserror::Error;

use crate::density::Verdict;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Set-expression syntax error, with the byte offset of the problem.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("capacity limit exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    /// The density verdict does not support certification.
    #[error("certificate refused: density verdict is {verdict}")]
    CertificateRefused { verdict: Verdict },

    /// The constant chain could not be completed (e.g. the convergence
    /// onset was not reached within the horizon).
    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid bitmap file: {0}")]
    Bitmap(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
