//! Orchestration shared by the `eqlines` binary and its tests: settings,
//! the digest-checked cache, run manifests, the end-to-end reproduction and
//! the property suite.

pub mod cache;
pub mod reproduce;
pub mod settings;
pub mod suite;

use eqlines_core::classes::ClassError;
use eqlines_core::nonexist::NonexistError;
use eqlines_core::pipeline::PipelineError;
use eqlines_core::tpenum::TpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("incomplete: {0}")]
    Incomplete(String),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error("cache file {path} does not match its recorded digest")]
    Tampered { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Nonexist(#[from] NonexistError),
    #[error(transparent)]
    Enum(#[from] TpError),
}

impl CliError {
    /// 1 usage, 2 incomplete search, 3 verification mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Incomplete(_) | CliError::Class(ClassError::Incomplete { .. }) => 2,
            CliError::Nonexist(NonexistError::Class(ClassError::Incomplete { .. })) => 2,
            CliError::Mismatch(_)
            | CliError::Tampered { .. }
            | CliError::Class(ClassError::BadWitness { .. } | ClassError::OrderMismatch { .. }) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().display().to_string();
        move |source| CliError::Io { path, source }
    }
}
