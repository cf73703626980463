//! File formats, configuration and command-line front end for the `olg`
//! binary. The model itself lives in `olg-core`.

pub mod cli;
pub mod config;
pub mod ingest_io;
pub mod table;

use std::path::Path;

pub use config::RunConfig;
pub use table::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Model(#[from] olg_core::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// 1 for numerical failures, 2 for usage, validation and IO problems.
    pub fn exit_code(&self) -> i32 {
        use olg_core::Error as E;
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) | CliError::Io(_) | CliError::Format { .. } => 2,
            CliError::Model(e) => match e {
                E::InvalidParameter { .. }
                | E::NegativeGamma { .. }
                | E::InvalidSeries(_)
                | E::EmptyInput
                | E::EmptyOverlap
                | E::UnitMismatch(_) => 2,
                _ => 1,
            },
        }
    }
}
