use std::path::PathBuf;

use phononherald::{AnalysisError, ConfigError, Error, FormatError, QuantumError};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const PHYSICS: i32 = 3;
    pub const DATA_FORMAT: i32 = 4;
    /// Analysis ran but no setting yielded a finite estimate.
    pub const EMPTY_ANALYSIS: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no delay setting produced a finite cross-correlation (outputs written, all estimates NaN)")]
    EmptyAnalysis,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Config(_)) | CliError::Usage(_) => exit::CONFIG,
            CliError::Core(Error::Quantum(_)) | CliError::Core(Error::Analysis(_)) => exit::PHYSICS,
            CliError::Core(Error::Format(_)) => exit::DATA_FORMAT,
            CliError::Output { .. } => exit::IO,
            CliError::EmptyAnalysis => exit::EMPTY_ANALYSIS,
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}
from_core!(ConfigError, FormatError, QuantumError, AnalysisError);
