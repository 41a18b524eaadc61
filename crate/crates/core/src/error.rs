use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{ticker}, run {run}: {source}")]
    Run {
        ticker: String,
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Process exit code for the CLI: 1 for bad input or configuration,
    /// 2 for failures that happen while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Ordering(_)
            | Error::Schema(_)
            | Error::Size(_)
            | Error::Config(_) => 1,
            Error::Shape { .. } | Error::Run { .. } | Error::Io { .. } => 2,
        }
    }
}
