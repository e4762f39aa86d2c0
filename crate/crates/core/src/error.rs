use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("2 is not a primitive root modulo {0}")]
    NotPrimitiveRoot(usize),

    #[error("no irreducible polynomial of degree {0} in the built-in table (supported: 1..=64)")]
    UnsupportedDegree(usize),

    #[error("input truncated in block {block}")]
    Truncated { block: u64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("system label mismatch: {0}")]
    LabelMismatch(String),

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("support condition violated: {0}")]
    Support(String),

    #[error("solver did not reach the requested gap after {iterations} iterations (bracket [{lower}, {upper}])")]
    SolverStalled {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
