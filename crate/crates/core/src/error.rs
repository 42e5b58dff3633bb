use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image has no ink pixels")]
    EmptyInk,
    #[error("page has no patch candidates")]
    NoInk,
    #[error("page has fewer than two text lines")]
    TooShort,
    #[error("incomplete style set for writer {writer}: {reason}")]
    IncompleteSet { writer: String, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("need at least two distinct writers to fit a classifier")]
    SingleClass,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("margin must be positive, got {0}")]
    InvalidMargin(f64),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown sample id {0}")]
    UnknownSample(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
