use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifest not found at {0}")]
    ManifestNotFound(PathBuf),

    #[error("trial {trial_id}: missing file {path}")]
    MissingFile { trial_id: String, path: PathBuf },

    #[error("schema mismatch in {context}: {message}")]
    Schema { context: String, message: String },

    #[error("trial {trial_id}: channel '{channel}' {message}")]
    Channel {
        trial_id: String,
        channel: String,
        message: String,
    },

    #[error("ratings: {0}")]
    Ratings(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("segmentation failed: {0}")]
    Segmentation(String),

    #[error("model: {0}")]
    Model(String),

    #[error("config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
