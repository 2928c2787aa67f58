use thiserror::Error;

use crate::solver::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("invalid oscillator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid marker amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("empty trial range for N = {0}")]
    EmptyRange(u64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("conditioned mass vanished (C = {0:e})")]
    ConditionedMassVanished(f64),

    #[error("no factor pair of {0} lies in the trial ranges")]
    NoFactorInRange(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("domain too large: {0}")]
    DomainTooLarge(String),

    #[error("infeasible constraint system: {0}")]
    InfeasibleSystem(String),

    #[error("no solution found after {iterations} iterations (last Pr(E) = {last_pr_e:e})")]
    NoSolutionFound { iterations: usize, last_pr_e: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
