//! Exit-code classification.

use atomcav::{ConfigError, PhysicsError};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: configuration, arguments, paths. Exit 2.
    Config(String),
    /// Numerical failure: instability, underflow, no convergence. Exit 3.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(format!("config: {e}"))
    }
}

impl From<PhysicsError> for CliError {
    fn from(e: PhysicsError) -> Self {
        match e {
            PhysicsError::InstabilityDetected { .. }
            | PhysicsError::NoConvergence { .. }
            | PhysicsError::StepSizeUnderflow { .. } => CliError::Numerical(e.to_string()),
            PhysicsError::DivergentDispersive
            | PhysicsError::EmptyWells
            | PhysicsError::OffResonantProbe(_)
            | PhysicsError::InvalidArgument(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
