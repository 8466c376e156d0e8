use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the audit engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unknown {axis} label {value:?}")]
    UnknownLabel {
        line: usize,
        axis: &'static str,
        value: String,
    },

    #[error("line {line}: duplicate message id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("sidecar records reference unknown message ids: {}", .0.join(", "))]
    OrphanSidecar(Vec<String>),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("missing group {0:?}")]
    MissingGroup(String),

    #[error("insufficient vocabulary: {0}")]
    InsufficientVocabulary(String),

    #[error("missing POS annotations for messages: {}", .0.join(", "))]
    MissingPos(Vec<String>),

    #[error("missing inputs: {}", .0.join("; "))]
    MissingInputs(Vec<String>),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// True for errors caused by user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::Io { .. })
    }
}
