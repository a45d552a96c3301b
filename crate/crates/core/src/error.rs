//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} modes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square with even dimension (got {rows}x{cols})")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("row {index} is linearly dependent on the preceding rows")]
    LinearlyDependent { index: usize },

    #[error("code failed validation: {0}")]
    InvalidCode(String),

    #[error("decoder shape mismatch: {0}")]
    DecoderShape(String),

    #[error("linear system has no solution: {0}")]
    Unsolvable(String),

    #[error("sign search exhausted without a satisfying assignment")]
    SignSearchExhausted,

    #[error("decomposition failed: {reason} (condition estimate {cond:.3e})")]
    DecompositionFailed { reason: String, cond: f64 },

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
