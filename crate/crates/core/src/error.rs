use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("tweet {id}: {reason}")]
    InvalidTweet { id: String, reason: &'static str },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidSplit(f64),

    #[error("invalid edge ({u}, {v}, {weight}): {reason}")]
    InvalidEdge {
        u: String,
        v: String,
        weight: f64,
        reason: &'static str,
    },

    #[error("node {0} is missing from the partition")]
    MissingNode(String),

    #[error("author {0} is not covered by the community partition")]
    MissingAuthor(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(String),

    #[error("all documents are empty after vocabulary filtering")]
    NoTokens,

    #[error("topic {topic} out of range for a model with {topics} topics")]
    TopicOutOfRange { topic: usize, topics: usize },

    #[error("input mismatch: {0}")]
    Mismatch(String),

    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),

    #[error("k must be positive")]
    InvalidK,

    #[error("unknown pooling scheme {0:?}")]
    UnknownScheme(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
