use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown attribute id {0} (valid ids are 0..29)")]
    UnknownAttribute(usize),

    #[error("series has {got} channels, model expects {expected}")]
    ChannelMismatch { expected: usize, got: usize },

    #[error("training data contains a single class ({0}); at least two are required")]
    SingleClass(String),

    #[error("window {0} is not part of the sweep grid")]
    UnknownWindow(usize),

    #[error("unknown series id {0:?}")]
    UnknownSeries(String),

    #[error("dataset {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("non-finite value in series {series_id:?} at t={t}")]
    NonFinite { series_id: String, t: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
