use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config invalid at {path}: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("{context}: {source}")]
    Computation {
        context: String,
        #[source]
        source: quenchlab_core::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invariant checks failed: {0}")]
    InvariantFailure(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } => 2,
            CliError::Computation { .. } | CliError::Io { .. } => 3,
            CliError::InvariantFailure(_) => 4,
        }
    }
}

/// Attaches scenario context to a core error.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for quenchlab_core::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Computation {
            context: what.to_string(),
            source,
        })
    }
}
