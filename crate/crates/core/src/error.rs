use thiserror::Error;

/// Errors raised by validation and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is not one: tr = {trace}")]
    TraceNotUnit { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:e}")]
    NegativeEigenvalue { min_eigenvalue: f64 },

    #[error("probability entry {index} is invalid: {value}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("rows are not orthonormal: max |T T^dagger - I| = {residual:e}")]
    NotRightUnitary { residual: f64 },

    #[error("ensemble does not reconstruct the state: max deviation = {residual:e}")]
    EnsembleMismatch { residual: f64 },

    #[error("ensemble cardinality {nalpha} is below the required {required}")]
    TooFewMembers { nalpha: usize, required: usize },

    #[error("retraction failed: ambient matrix is rank deficient (min singular value^2 = {min_gram_eigenvalue:e})")]
    RankDeficient { min_gram_eigenvalue: f64 },

    #[error("every ensemble weight is below {w_tol:e}")]
    DegenerateDecomposition { w_tol: f64 },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
