use thiserror::Error;

/// Errors raised by the lattice-state toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Pauli index {0} out of range 0..=3")]
    PauliIndexOutOfRange(u8),

    #[error("lattice subset is empty")]
    EmptySubset,

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("grid parse error: {0}")]
    GridParse(String),

    #[error("consistency violation: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
