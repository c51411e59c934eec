//! Crate-wide error type.

/// Errors produced by construction, engines, and solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("family invariant violated: {0}")]
    FamilyInvariant(String),

    #[error("orthonormality violated: {0}")]
    NotOrthonormal(String),

    #[error("vector is not in the sum of the complements (residual {residual:.3e})")]
    NotInComplementSum { residual: f64 },

    #[error("zero vector not allowed here")]
    ZeroVector,

    #[error("all family members have zero rank")]
    AllMembersZeroRank,

    #[error("solver did not certify: {0}")]
    NotCertified(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
