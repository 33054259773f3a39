use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("wrong GSO kind: expected {expected}, got {got}")]
    Kind { expected: &'static str, got: &'static str },

    #[error("invalid group assignment: {0}")]
    Groups(String),

    #[error("group metric requires every group size >= 2 (smallest is {0})")]
    GroupTooSmall(usize),

    #[error("eigenvector matrix is not orthonormal (Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scenario is infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
