use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinslerError {
    #[error("vector is (numerically) zero: |y| = {norm:e}")]
    ZeroVector { norm: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("fundamental tensor is not positive definite at y = {direction:?} (smallest eigenvalue {min_eigenvalue:e})")]
    NotStrictlyConvex {
        direction: Vec<f64>,
        min_eigenvalue: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("connection D must be torsion free; offending components (i,j,k): {components:?}")]
    TorsionInSymmetricConnection { components: Vec<(usize, usize, usize)> },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular integrand at theta = {theta}")]
    Pole { theta: f64 },

    #[error("finite-difference step underflow near the zero section (|y| = {norm:e})")]
    StepUnderflow { norm: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FinslerError>;
