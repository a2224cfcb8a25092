//! Harness errors carry the process exit code: 1 usage/config, 2 data,
//! 3 internal assertion.

use std::fmt;

#[derive(Debug)]
pub enum HarnessError {
    /// Bad flags, bad config keys or values, infeasible requests.
    Usage(String),
    /// Unreadable or malformed datasets and network files.
    Data(String),
    /// Invariant violations inside the harness itself.
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Data(_) => 2,
            HarnessError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(msg) => write!(f, "config error: {msg}"),
            HarnessError::Data(msg) => write!(f, "data error: {msg}"),
            HarnessError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

pub fn usage(msg: impl fmt::Display) -> HarnessError {
    HarnessError::Usage(msg.to_string())
}

pub fn data(msg: impl fmt::Display) -> HarnessError {
    HarnessError::Data(msg.to_string())
}

pub fn internal(msg: impl fmt::Display) -> HarnessError {
    HarnessError::Internal(msg.to_string())
}
