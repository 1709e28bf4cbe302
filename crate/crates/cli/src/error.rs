use kadets_core::{ExtendError, GeomError, NonEuclidError, VerifyError};
use thiserror::Error;

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONTRACT: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ExtendError> for CliError {
    fn from(e: ExtendError) -> Self {
        match e {
            ExtendError::Geom(g) => g.into(),
            other => CliError::Contract(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Geom(g) => g.into(),
            VerifyError::Extend(x) => x.into(),
            VerifyError::UnboundedCell(i) => {
                CliError::Contract(format!("cell {i} is unbounded inside a bounded body"))
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<NonEuclidError> for CliError {
    fn from(e: NonEuclidError) -> Self {
        CliError::Input(e.to_string())
    }
}
