use std::path::PathBuf;

use lymphkit_core::Error as CoreError;
use thiserror::Error;

/// Process exit status for bad inputs (missing files, malformed volumes,
/// invalid options).
pub const EXIT_INPUT: i32 = 2;
/// Process exit status for failures inside the pipeline itself.
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Input {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{0}")]
    Usage(String),

    #[error("missing input: {0}")]
    Missing(PathBuf),

    #[error("cannot write {path}: {reason}")]
    Output { path: PathBuf, reason: String },

    #[error("{context}: {source}")]
    Internal {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Usage(_) | CliError::Missing(_) => EXIT_INPUT,
            CliError::Output { .. } | CliError::Internal { .. } => EXIT_INTERNAL,
        }
    }

    /// Errors raised while loading or validating user-supplied data.
    pub fn input(context: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
        let context = context.into();
        move |source| CliError::Input { context, source }
    }

    /// Errors raised by a processing step on data that already validated.
    /// Library errors that can only stem from the data are still reported
    /// as input errors.
    pub fn stage(context: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
        let context = context.into();
        move |source| match source {
            CoreError::EmptySurface | CoreError::EmptyComponent => {
                CliError::Internal { context, source }
            }
            source => CliError::Input { context, source },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
