use std::fmt;

use wbctl_core::Error;

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad files, parameters or keys.
    Input(String),
    /// Singular configurations, lost positive definiteness, failed checks.
    Numerical(String),
}

impl Failure {
    pub const USAGE_CODE: u8 = 1;

    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

pub fn io_failure(path: &std::path::Path, e: impl fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}
