use std::path::PathBuf;

use roadtrack::{EvalError, IoError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input file: {}", .0.display())]
    MissingInput(PathBuf),
    #[error(transparent)]
    Input(#[from] IoError),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("need at least {splits} sequences for {splits}-fold cross validation, got {found}")]
    InsufficientSequences { found: usize, splits: usize },
}

impl CliError {
    /// 1 for usage problems, 2 for missing or unreadable files, 3 when
    /// evaluation is impossible.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::InsufficientSequences { .. } => 1,
            CliError::MissingInput(_) | CliError::Input(_) | CliError::Output { .. } => 2,
            CliError::Eval(_) => 3,
        }
    }

    pub(crate) fn output(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Output { path: path.to_path_buf(), source }
    }
}
