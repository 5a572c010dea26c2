//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by the compiler, environments, oracle, and trainer.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller handed in something malformed (bad action index, wrong
    /// joint-action length, dimension mismatch, invalid parameter).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An API contract was broken (stepping a finished episode, querying a
    /// fully assigned list for its next open slot).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Exact integer arithmetic left the representable range.
    #[error("arithmetic range exceeded: {0}")]
    ArithmeticRange(String),

    /// An enumeration was refused because the instance exceeds the size
    /// guard.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// A loss or parameter became NaN/Inf during training.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Malformed serialized data (checkpoint, MMDP text file).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
