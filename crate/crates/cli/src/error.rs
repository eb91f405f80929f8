use std::fmt;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Io(String),
    Numeric(String),
    /// Contradictory verdict, or a reproduction that does not match.
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Inconsistent(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Inconsistent(m) => write!(f, "inconsistent: {m}"),
        }
    }
}

impl From<coalescent_core::Error> for CliError {
    fn from(e: coalescent_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
