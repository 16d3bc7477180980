use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    /// Every importance value was strictly positive, so no null can be built.
    #[error("degenerate null: no non-positive importance values")]
    DegenerateNull,

    #[error("undefined measure: {0}")]
    UndefinedMeasure(String),

    #[error("column `{column}` is constant and cannot be standardized")]
    ConstantColumn { column: String },

    #[error("summary error: {0}")]
    Summary(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), msg: msg.into() }
    }
}
