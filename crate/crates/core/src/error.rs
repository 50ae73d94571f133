use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("covariate level {0} has no observations")]
    DegenerateLevel(usize),

    #[error("observation {index} refers to unknown covariate level {level}")]
    UnknownLevel { index: usize, level: usize },

    #[error("observation {index} has invalid time {time}; times must be finite and positive")]
    InvalidTime { index: usize, time: f64 },

    #[error("subsample has no events; the Kaplan-Meier estimate of the event distribution is degenerate")]
    NoEvents,

    #[error("need at least two distinct points on the estimation interval, got {0}")]
    DegenerateDomain(usize),

    #[error("boundary kernel moment system is singular at s = {0}")]
    SingularBoundarySystem(f64),

    #[error("evaluation point {t} outside [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("bootstrap for level {level} produced {attempts} consecutive degenerate replicates")]
    DegenerateBootstrap { level: usize, attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
