use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("direction lies in the selected span (|Qb| = {norm:e} <= {tol:e})")]
    DegenerateDirection { norm: f64, tol: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("no root found in [{lo}, {hi}]")]
    NoRootInRange { lo: f64, hi: f64 },
    #[error("invalid interval: lo = {lo} must be below hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid tolerance {0}: must be positive and finite")]
    InvalidTolerance(f64),
    #[error("k = {k} exceeds the numerical rank {rank}")]
    RankExceeded { k: usize, rank: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no admissible column left after {selected} selections")]
    AllCandidatesDegenerate { selected: usize },
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("eigenvalue {value} at position {index} is not positive")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("spectrum is not sorted in descending order at position {0}")]
    UnsortedSpectrum(usize),
    #[error("k = {k} is outside the regime [{lo}, {hi})")]
    OutOfRegime { k: usize, lo: f64, hi: f64 },
    #[error("enumeration of {count} subsets exceeds the cap of {cap}")]
    TooManySubsets { count: u128, cap: u128 },
    #[error("matrix does not have full column rank (rank {rank} < {cols})")]
    NotFullColumnRank { rank: usize, cols: usize },
    #[error("column index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("duplicate column index {0}")]
    DuplicateIndex(usize),
    #[error("invalid instance specification: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
