use std::fmt;

use equitile::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INPUT: u8 = 2;
    pub const NEGATIVE: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: exit::INPUT, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: exit::NUMERICAL, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::RankDeficient { .. } | CoreError::NotHermitian(_) => exit::NEGATIVE,
            CoreError::Eigensolver(_) => exit::NUMERICAL,
            CoreError::InvalidPartition(_)
            | CoreError::Inadmissible { .. }
            | CoreError::DimensionMismatch(_)
            | CoreError::ZeroVector
            | CoreError::InvalidPhase(_)
            | CoreError::PhaseCount { .. }
            | CoreError::ZeroWeight { .. } => exit::INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
