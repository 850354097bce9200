use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CoresetError> = std::result::Result<T, E>;

/// Errors raised by the library. Each variant maps to a stable numeric code
/// (see [`CoresetError::code`]) that the CLI surfaces in its JSON output.
#[derive(Debug, Error)]
pub enum CoresetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} exceeds the number of distinct points ({distinct})")]
    TooFewDistinctPoints { k: usize, distinct: usize },

    #[error("group {0} has zero cost under the reference solution")]
    ZeroCostGroup(String),

    #[error("solution has zero cost on the input; relative distortion is undefined")]
    ZeroReferenceCost,

    #[error("{0} is not an outer group")]
    NotAnOuterGroup(String),

    #[error("point set is not a standard basis instance: {0}")]
    NotBasisInstance(String),

    #[error("unknown center id {0}")]
    UnknownCenter(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("non-finite coordinate at row {row}")]
    NonFinite { row: usize },

    #[error("negative weight at row {row}")]
    NegativeWeight { row: usize },

    #[error("malformed binary file: {0}")]
    Format(String),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid json")]
    Json(#[from] serde_json::Error),
}

impl CoresetError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoresetError::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoresetError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable error code.
    pub fn code(&self) -> u32 {
        match self {
            CoresetError::DimensionMismatch { .. } => 10,
            CoresetError::InvalidParameter(_) => 11,
            CoresetError::TooFewDistinctPoints { .. } => 12,
            CoresetError::ZeroCostGroup(_) => 20,
            CoresetError::ZeroReferenceCost => 21,
            CoresetError::NotAnOuterGroup(_) => 22,
            CoresetError::NotBasisInstance(_) => 30,
            CoresetError::UnknownCenter(_) => 31,
            CoresetError::MalformedHeader(_) => 40,
            CoresetError::Parse { .. } => 41,
            CoresetError::NonFinite { .. } => 42,
            CoresetError::NegativeWeight { .. } => 43,
            CoresetError::Format(_) => 44,
            CoresetError::Io { .. } => 50,
            CoresetError::Json(_) => 51,
        }
    }
}
