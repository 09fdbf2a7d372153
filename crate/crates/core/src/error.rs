use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown user: {0}")]
    UnknownUser(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("both classes must be present")]
    SingleClass,

    #[error("feature schema mismatch: model trained on `{expected}`, got `{got}`")]
    SchemaMismatch { expected: String, got: String },

    #[error("invalid hyperparameter for {kind}: {detail}")]
    Hyperparameter { kind: String, detail: String },

    #[error("instance {instance} is missing the {signal} signal")]
    MissingSignal { instance: String, signal: String },

    #[error("signal family {0} has no candidates")]
    MissingFamily(String),

    #[error("design matrix is rank deficient at factor `{0}`")]
    RankDeficient(String),

    #[error("model artifact: {0}")]
    ModelFormat(String),

    #[error("collector: {0}")]
    Collector(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
