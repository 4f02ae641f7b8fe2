use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("evolution produced NaN/Inf at step {step}")]
    Blowup { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("band empty")]
    BandEmpty,

    #[error("zero field")]
    ZeroField,

    #[error("zero right-hand side")]
    ZeroRhs,

    #[error("wrap-around detected: boundary shell carries {ratio:.3e} of the supremum")]
    WrapAround { ratio: f64 },

    #[error("data not localized: {0}")]
    NotLocalized(String),

    #[error("kernel support {support:.4} does not fit the box (limit {limit:.4})")]
    SupportViolation { support: f64, limit: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("malformed scale function: {0}")]
    MalformedScale(String),

    #[error("delta check failed: {0}")]
    DeltaCheck(String),

    #[error("snapshot format error in {path:?}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config error (line {line}): {reason}")]
    Config { line: usize, reason: String },

    #[error("guard breached: {0}")]
    Guard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
