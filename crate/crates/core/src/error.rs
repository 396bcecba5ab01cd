//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by exact-arithmetic and verification operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("mismatched field contexts (orders {0} and {1})")]
    CtxMismatch(u64, u64),

    /// A coefficient outside the known window of a truncated series was needed.
    #[error("coefficient at exponent {0} lies outside the known window")]
    PrecisionInsufficient(i64),

    /// Inversion of a series whose known coefficients are all zero.
    #[error("series has no known nonzero coefficient")]
    ZeroSeries,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid algebra data: {0}")]
    InvalidAlgebra(String),

    #[error("invalid group structure: {0}")]
    InvalidGroup(String),

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
