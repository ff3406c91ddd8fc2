use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reveal shape mismatch: {0}")]
    RevealShape(String),

    #[error("horizon T = {horizon} too small: forced exploration needs T0 = {warmup} < T")]
    HorizonTooSmall { horizon: usize, warmup: usize },

    #[error("round {round}: no level certified a break; widths fell below 2^-L")]
    LevelsExhausted { round: usize },

    #[error("value schedule exhausted after {available} rounds (needed {needed})")]
    ScheduleExhausted { available: usize, needed: usize },

    #[error("mean regret at T = {horizon} is {value}; log-log fit needs positive values")]
    NonPositiveRegret { horizon: usize, value: f64 },

    #[error("non-finite regret at round {round} (replication seed {seed})")]
    NotFinite { round: usize, seed: u64 },

    #[error("replication {replication} (seed {seed}) failed: {source}")]
    Replication {
        replication: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Rejects prices outside the unit interval (NaN included).
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value })
    }
}
