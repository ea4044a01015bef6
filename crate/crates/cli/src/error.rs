use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Every problem found while validating a configuration, reported together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigProblems(pub Vec<String>);

impl fmt::Display for ConfigProblems {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration problem(s):", self.0.len())?;
        for problem in &self.0 {
            write!(f, "\n  - {problem}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(ConfigProblems),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error("numeric degeneracy: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn config(problem: impl Into<String>) -> Self {
        CliError::Config(ConfigProblems(vec![problem.into()]))
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<phaselock::Error> for CliError {
    fn from(err: phaselock::Error) -> Self {
        if err.is_numeric() {
            CliError::Numeric(err.to_string())
        } else {
            CliError::Data(err.to_string())
        }
    }
}

macro_rules! via_core_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::from(phaselock::Error::from(err))
            }
        }
    )*};
}

via_core_error!(
    phaselock::error::IngestError,
    phaselock::error::PreprocessError,
    phaselock::error::ConnectivityError,
    phaselock::error::StatsError,
    phaselock::error::SynthError
);
