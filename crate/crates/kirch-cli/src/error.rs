//! CLI error type and the process exit-code contract.

use std::path::PathBuf;

/// Everything a command can fail with, mapped onto the documented exit
/// codes: 1 usage/IO, 2 solver non-convergence, 3 unsupported size.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("bad input data: {0}")]
    Parse(String),

    #[error("solver did not converge within the iteration budget (final KKT residual {kkt:.3e}); partial output written")]
    NotConverged { kkt: f64 },

    #[error("{0}")]
    Core(kirch_core::Error),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl CliError {
    /// The documented process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Io { .. }
            | CliError::Config { .. }
            | CliError::Parse(_)
            | CliError::InsufficientData(_) => 1,
            CliError::NotConverged { .. } => 2,
            CliError::Core(kirch_core::Error::UnsupportedSize { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

impl From<kirch_core::Error> for CliError {
    fn from(e: kirch_core::Error) -> CliError {
        CliError::Core(e)
    }
}

/// Attach the offending path to a raw IO error.
pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type Result<T> = std::result::Result<T, CliError>;
