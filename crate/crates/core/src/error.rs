use thiserror::Error;

/// Errors produced by the model, the score engine and the simulators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rates: {0}")]
    InvalidRates(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("site {site} out of range for a lattice of {len} sites")]
    InvalidSite { site: usize, len: usize },
    #[error("arrivals must carry a nonzero gas type")]
    VacantArrival,
    #[error("gas {gas} is not a type of the {n}-gas model")]
    UnknownGas { gas: u32, n: u32 },
    #[error("score table: {0}")]
    ScoreTable(String),
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("follower string too short: {0}")]
    FollowerTooShort(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("coupling law: {0}")]
    CouplingLaw(String),
    #[error("script: {0}")]
    Script(String),
}

pub type Result<T> = std::result::Result<T, Error>;
