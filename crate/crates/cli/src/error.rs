use std::fmt;

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or names. Exit code 1.
    Usage(String),
    /// Missing or malformed input data. Exit code 2.
    Data(String),
    /// Anything that went wrong while running. Exit code 3.
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn usage(m: impl fmt::Display) -> CliError {
    CliError::Usage(m.to_string())
}

pub fn data(m: impl fmt::Display) -> CliError {
    CliError::Data(m.to_string())
}

pub fn runtime(m: impl fmt::Display) -> CliError {
    CliError::Runtime(m.to_string())
}
