use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DataError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset layout: {0}")]
    Layout(String),

    #[error("{path}: {reason}")]
    File { path: PathBuf, reason: String },

    #[error("dataset at {0} contains no readable samples")]
    Empty(PathBuf),

    #[error("stratification: {0}")]
    Stratification(String),

    #[error("partition: {0}")]
    Partition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
