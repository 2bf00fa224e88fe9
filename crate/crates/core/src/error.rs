use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("weighted indicator is not admissible: weight block of cell {cell} has zero norm")]
    Inadmissible { cell: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot build a reflector from the zero vector")]
    ZeroVector,

    #[error("phase must lie on the unit circle, got modulus {0}")]
    InvalidPhase(f64),

    #[error("expected {expected} phases, got {got}")]
    PhaseCount { expected: usize, got: usize },

    #[error("weight entry {index} is zero")]
    ZeroWeight { index: usize },

    #[error("block {block} is rank deficient (smallest/largest singular value ratio {ratio:e})")]
    RankDeficient { block: usize, ratio: f64 },

    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
