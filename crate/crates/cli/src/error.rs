use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] aeq_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit status for a run that completed with every assertion passing.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl CliError {
    /// Numerical breakdowns exit with 3; everything traceable to the
    /// configuration or the file system exits with 1.
    pub fn exit_code(&self) -> i32 {
        use aeq_core::Error as E;
        match self {
            CliError::Core(E::Quadrature { .. } | E::RootFinding { .. } | E::Domain(_)) => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }
}
