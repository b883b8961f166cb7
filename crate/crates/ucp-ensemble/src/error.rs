use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of the file formats and commands.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{message} at row {row}")]
    Row { row: usize, message: String },
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("profile line {line}: {message}")]
    Profile { line: usize, message: String },
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("invalid value for {flag}: {message}")]
    InvalidFlag { flag: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] ucp_ensemble_core::Error),
    #[error("cannot read {path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AppError {
    /// 2 for bad input data, 3 for everything the user cannot fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io(_) => 3,
            AppError::Core(e) if is_internal(e) => 3,
            _ => 2,
        }
    }
}

fn is_internal(e: &ucp_ensemble_core::Error) -> bool {
    use ucp_ensemble_core::Error as E;
    match e {
        E::Training { .. } | E::ZeroWeightSum => true,
        E::Fold { source, .. } => is_internal(source),
        _ => false,
    }
}

pub type AppResult<T> = Result<T, AppError>;
