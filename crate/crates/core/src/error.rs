use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{order} needs at least {min} grid points, got {n}")]
    TooFewPoints {
        order: &'static str,
        min: usize,
        n: usize,
    },
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field shape {got:?} does not match grid shape {expected:?}")]
    GridMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("the exact solution is only available for the rotation velocity field")]
    NotRotation,
    #[error("reference field has zero norm")]
    ZeroReference,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resolutions must double from row to row: {0}")]
    NotDoubling(String),
    #[error("error of row {0} is zero or not finite")]
    DegenerateError(usize),
    #[error("linear solver did not converge (relative residuals: {history:?})")]
    NoConvergence { history: Vec<f64> },
    #[error("factorization failed: {0}")]
    Factorization(String),
}
