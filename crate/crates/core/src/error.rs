use std::fmt;

use thiserror::Error;

/// Coordinate frame a wrench is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Frame {
    /// Force/torque sensor frame.
    Sensor,
    /// End-effector frame.
    EndEffector,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Sensor => f.write_str("FT"),
            Frame::EndEffector => f.write_str("EE"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wrench expressed in frame {got}, expected {expected}")]
    WrongFrame { expected: Frame, got: Frame },

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("{0} is not symmetric positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("task Jacobian is rank deficient (smallest singular value {min_singular_value:e})")]
    Singular { min_singular_value: f64 },

    #[error("button id {0} is not in 1..=4")]
    InvalidButton(u8),

    #[error("malformed button message: {0}")]
    Message(String),

    #[error("series '{0}' is constant; normalization undefined")]
    ConstantSeries(String),

    #[error("reduction undefined: {0} of the reference series is zero")]
    ZeroReference(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{0}")]
    Config(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NotPositiveDefinite(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
