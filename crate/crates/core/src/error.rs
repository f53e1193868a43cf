use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sample `{sample_id}`: {message}")]
    InvalidSample { sample_id: String, message: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("metric `{metric}` missing for sample `{sample_id}`, system `{system}`")]
    MissingMetricCell {
        metric: String,
        sample_id: String,
        system: String,
    },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("feature width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("sample `{0}` has incomplete annotation")]
    IncompleteAnnotation(String),

    #[error("bucket quota {quota} is invalid for a pool of {pool} samples")]
    InvalidQuota { quota: usize, pool: usize },

    #[error("invalid phase plan: {0}")]
    InvalidPlan(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("engine state is `{actual}`, operation requires `{expected}`")]
    WrongStatus {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("annotation rejected for sample `{sample_id}`: {message}")]
    AnnotationRejected { sample_id: String, message: String },

    #[error("unsupported state file version {found} (expected {expected})")]
    StateVersion { found: u32, expected: u32 },

    #[error("corrupt state: {0}")]
    CorruptState(String),

    #[error("state is locked by another writer ({0})")]
    Locked(PathBuf),

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

    pub(crate) fn sample(sample_id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidSample {
            sample_id: sample_id.into(),
            message: message.into(),
        }
    }
}
