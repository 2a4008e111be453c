use thiserror::Error;

/// Errors raised by tensor kernels, merit evaluation, projections and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("tensor order {0} must be even")]
    OddOrder(usize),

    #[error("tensor is not symmetric (entry {flat} differs from its permutation by {gap:e})")]
    NotSymmetric { flat: usize, gap: f64 },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("zero vector where a nonzero one is required")]
    ZeroVector,

    #[error("singular denominator: Bx^m = {0:e}")]
    SingularDenominator(f64),

    #[error("logarithmic merit undefined: {tensor}x^m = {value:e} is not positive")]
    NonPositive { tensor: &'static str, value: f64 },

    #[error("cannot B-normalize: Bu^m = {0:e}")]
    Scaling(f64),

    #[error("matrix is not symmetric (max |M - M^T| = {0:e})")]
    Asymmetric(f64),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("tensor file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
