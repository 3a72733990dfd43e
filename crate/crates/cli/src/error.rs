use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("config field {field}: {msg}")]
    Field { field: String, msg: String },
    #[error("{0}")]
    Core(#[from] affwalk_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn field(field: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.into(),
        msg: msg.into(),
    }
}
