//! Error-to-exit-code policy.
//!
//! Exit 0 on success, 2 on usage errors (bad flags, bad config values,
//! invalid parameters), 3 when an enumeration or state budget refuses a
//! computation, and 1 for all other runtime failures (I/O, malformed
//! documents, non-convergence).

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

impl From<tn_core::Error> for CliError {
    fn from(e: tn_core::Error) -> Self {
        match e {
            tn_core::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            tn_core::Error::InvalidParam(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
