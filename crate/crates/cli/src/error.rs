use std::io::ErrorKind;

use metaemu_core::{DistributionError, EmulationError, FitError, IngestError};
use metaemu_service::ApiError;

/// Exit status: 1 for bad input, 2 for numerical failure.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match &e {
            IngestError::Io { path, source } if source.kind() == ErrorKind::NotFound => {
                CliError::Input(format!("file not found: {}", path.display()))
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DistributionError> for CliError {
    fn from(e: DistributionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidTau(_) | FitError::InvalidDesign(_) | FitError::InsufficientObservations { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EmulationError> for CliError {
    fn from(e: EmulationError) -> Self {
        match e {
            EmulationError::Fit(f) => f.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        if e.status.is_server_error() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
