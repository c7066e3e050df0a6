//! Command-line front end for `weil-core`: document formats, a small on-disk
//! session registry, and the `weil` subcommands.
//!
//! Every document carries a `format_version` field; see [`doc`].

pub mod cli;
pub mod doc;
pub mod extract;
pub mod input;
pub mod session;

pub use cli::run;

use weil_core::Error as CoreError;

/// Errors surfaced by the command layer. All of them are user-input errors
/// (exit code 2) except limit verdicts, which count as check failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("name `{0}` is already registered")]
    DuplicateName(String),
    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::LimitNotWeil(_) | CoreError::ConeNotVerified(_)) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
