//! Error classification for the command-line tools.
//!
//! Failures fall into two classes with distinct process exit codes:
//! configuration/validation problems (exit 2) and numerical failures during a
//! run (exit 3).

use std::fmt;

/// Harness-level error with its exit-code class.
#[derive(Debug)]
pub enum HarnessError {
    /// Bad configuration, bad units, missing files, invalid CLI input.
    Validation(String),
    /// The numerics failed mid-run (integration blow-up, singular systems).
    Numerical(String),
}

impl HarnessError {
    /// Process exit code mandated for this class.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Validation(_) => 2,
            HarnessError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            HarnessError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Validation(format!("i/o error: {e}"))
    }
}

/// Library errors surface as numerical failures unless they are parameter
/// rejections, which are configuration problems.
impl From<continuum_dynamics::Error> for HarnessError {
    fn from(e: continuum_dynamics::Error) -> Self {
        match &e {
            continuum_dynamics::Error::InvalidParams(_) => {
                HarnessError::Validation(e.to_string())
            }
            _ => HarnessError::Numerical(e.to_string()),
        }
    }
}

/// Convenience alias used across the harness.
pub type Result<T> = std::result::Result<T, HarnessError>;
