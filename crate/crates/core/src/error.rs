use thiserror::Error;

use crate::locality::ScheduleError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("trial count must be at least {min}, got {got}")]
    TooFewTrials { min: u64, got: u64 },

    #[error("angle grid is empty")]
    EmptyGrid,

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("vector ({0}, {1}, {2}) has no direction")]
    ZeroVector(f64, f64, f64),

    #[error("cannot merge an empty list of estimates")]
    NothingToMerge,

    #[error("estimates disagree on {0}")]
    MismatchedEstimates(&'static str),

    #[error("invalid schedule: {0}")]
    Schedule(#[from] ScheduleError),

    #[error("causal log is incomplete: missing {0}")]
    IncompleteLog(&'static str),
}
