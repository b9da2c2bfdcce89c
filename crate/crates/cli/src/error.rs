use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_MANIFEST: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARTIAL_FAILURE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid manifest: {0}")]
    Manifest(#[source] pufbench::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Artifact {
        path: PathBuf,
        #[source]
        source: pufbench::Error,
    },

    #[error("incomplete run directory {dir}: {missing}")]
    IncompleteRun { dir: PathBuf, missing: String },

    #[error("{} learner(s) failed: {}", .0.len(), .0.join(", "))]
    LearnerFailures(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) => EXIT_INVALID_MANIFEST,
            CliError::Io { .. } | CliError::Artifact { .. } | CliError::IncompleteRun { .. } => EXIT_IO,
            CliError::LearnerFailures(_) => EXIT_PARTIAL_FAILURE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>) -> impl FnOnce(pufbench::Error) -> CliError {
        let path = path.into();
        move |source| match source {
            pufbench::Error::Io(source) => CliError::Io { path, source },
            source => CliError::Artifact { path, source },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
