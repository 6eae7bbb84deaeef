use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the alignment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no rows")]
    NoRows { path: PathBuf },

    #[error("{path}: row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {col}: cannot parse {text:?} as a number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        col: usize,
        text: String,
    },

    #[error("{path}: row {row}, column {col}: non-finite value")]
    NonFinite { path: PathBuf, row: usize, col: usize },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("invalid data matrix: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "zero bandwidth at point {point}: its {k}-th neighbor is a duplicate; \
         use a fixed bandwidth or deduplicate the data"
    )]
    ZeroBandwidth { point: usize, k: usize },

    #[error("point {0} has zero degree (kernel underflow); increase the bandwidth")]
    ZeroDegree(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{solver} did not converge: {detail}")]
    NoConvergence { solver: &'static str, detail: String },

    #[error("report serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
