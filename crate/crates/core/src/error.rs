use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    #[error("dense frame matrix for {pixels} pixels exceeds the oracle limit of {limit}")]
    OracleScaleExceeded { pixels: usize, limit: usize },

    #[error(
        "no boundary candidates: no pixel has gradient 1-norm >= {epsilon} (flat image?); \
         try a smaller epsilon"
    )]
    NoCandidates { epsilon: f64 },

    #[error("iteration cap of {max_iters} reached with {remaining} candidates left")]
    IterationCapExceeded { max_iters: usize, remaining: usize },

    #[error("extent mismatch: {left:?} vs {right:?}")]
    ExtentMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: expected a grayscale image, found {found}")]
    NotGrayscale { path: PathBuf, found: String },

    #[error("{path}: unknown element type `{name}`")]
    UnknownElementType { path: PathBuf, name: String },

    #[error("{path}: payload has {actual} bytes but header describes {expected}")]
    SizeMismatch {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
