use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index ({i}, {j}) out of range for order {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("duplicate entry ({i}, {j}) in constraint {k}")]
    DuplicateEntry { k: usize, i: usize, j: usize },

    #[error("Gram matrix is numerically singular at constraint {index}")]
    SingularGram { index: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("block {block} subproblem failed: {reason}")]
    Subproblem { block: usize, reason: String },

    #[error("non-finite iterate at iteration {iteration}: {detail}")]
    NonFiniteIterate { iteration: usize, detail: String },

    #[error("{0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
