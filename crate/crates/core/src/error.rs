use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("bracket parse error at offset {offset}: {message}")]
    TreeParse { offset: usize, message: String },

    #[error("tree leaves do not match sentence text at offset {offset}: {message}")]
    Alignment { offset: usize, message: String },

    #[error("leaf index {index} out of range for tree with {len} leaves")]
    LeafIndex { index: usize, len: usize },

    #[error("score record {id}: {message}")]
    Record { id: String, message: String },

    #[error("scores for sentence {id}: {message}")]
    Scores { id: String, message: String },

    #[error("sidecar transport: {0}")]
    Transport(String),

    #[error("sidecar protocol: {0}")]
    Protocol(String),

    #[error("sidecar timed out after {secs}s waiting for request {id}")]
    Timeout { id: String, secs: u64 },

    #[error("sidecar reported an error for {id}: {message}")]
    Sidecar { id: String, message: String },

    #[error("metric: {0}")]
    Metric(String),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
