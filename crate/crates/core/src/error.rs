//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by model parsing, estimation, oracles, tree navigation
/// and certification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("variable x{index} out of range for dimension {dimension}")]
    VariableOutOfRange { index: usize, dimension: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {got} exceeds cap {cap} for {what}")]
    DimensionOverCap {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    #[error("duplicate feature index {0} in restriction")]
    DuplicateFeature(usize),

    #[error("restriction value for feature {feature} disagrees with the instance")]
    RestrictionMismatch { feature: usize },

    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("node path of length {len} exceeds depth budget {depth}")]
    PathTooLong { len: usize, depth: usize },

    #[error("operation requires a non-leaf node")]
    NotInternal,

    #[error("operation requires a leaf node")]
    NotLeaf,

    #[error("no unrestricted feature remains")]
    NoFreeFeature,

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid_param(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            msg: msg.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
