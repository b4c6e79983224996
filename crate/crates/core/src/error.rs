use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("unmapped class `{0}` encountered during remapping")]
    UnmappedClass(String),

    #[error("unknown class `{0}` in query class filter")]
    UnknownClass(String),

    #[error("query syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("enumeration infeasible: pool of {size} detections exceeds limit {limit}")]
    EnumerationInfeasible { size: usize, limit: usize },

    #[error("image {0} has no ground truth annotations")]
    MissingGroundTruth(u64),

    #[error("key sets differ; only in estimates: {only_estimates:?}, only in truths: {only_truths:?}")]
    KeyMismatch {
        only_estimates: Vec<u64>,
        only_truths: Vec<u64>,
    },

    #[error("{0}")]
    Undefined(String),
}
