//! Error classification behind the exit-code contract: 2 for configuration
//! problems, 3 for data problems, 4 for solver failures.

use std::fmt;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Solver(anyhow::Error),
}

impl CliError {
    pub fn config(err: impl Into<anyhow::Error>) -> Self {
        CliError::Config(err.into())
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        CliError::Data(err.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }

    fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Config(e) | CliError::Data(e) | CliError::Solver(e) => e,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:#}` chains causes onto one line for terminal output.
        write!(f, "{:#}", self.inner())
    }
}

impl From<spintop_core::Error> for CliError {
    fn from(err: spintop_core::Error) -> Self {
        match err {
            e @ spintop_core::Error::Solver { .. } => CliError::Solver(e.into()),
            e => CliError::Data(anyhow::Error::from(e)),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
