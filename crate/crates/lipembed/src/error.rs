use std::io;

use lipembed_core::fields::FieldError;
use lipembed_core::hierarchy::BuildError;
use lipembed_core::oracle::OracleError;
use lipembed_core::params::ParamError;
use lipembed_core::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("cap: {0}")]
    Cap(String),
    #[error("io: {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// Process exit status: 1 config, 2 precondition, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Precondition(_) | Error::Io { .. } | Error::Format(_) => 2,
            Error::Cap(_) => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<FieldError> for Error {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::TooLarge { .. } => Error::Cap(e.to_string()),
            _ => Error::Precondition(e.to_string()),
        }
    }
}

impl From<ParamError> for Error {
    fn from(e: ParamError) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<BuildError> for Error {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Param(p) => p.into(),
            _ => Error::Precondition(e.to_string()),
        }
    }
}

impl From<StatsError> for Error {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Build(b) => b.into(),
            _ => Error::Precondition(e.to_string()),
        }
    }
}

impl From<OracleError> for Error {
    fn from(e: OracleError) -> Self {
        Error::Cap(e.to_string())
    }
}
