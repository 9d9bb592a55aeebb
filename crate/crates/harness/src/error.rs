//! Harness error type with the CLI exit-code split: configuration problems
//! exit 1, runtime failures exit 2.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ctxrec_core::CoreError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    /// CLI exit code: 1 for validation errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
