use std::fmt;

use thiserror::Error;

/// A scenario or config value outside its allowed domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Syntax, type or unknown-key error; the message carries line and key.
    #[error("{}", .0.trim_end())]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("no channels to rank")]
    NoChannels,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("no candidate TAPs")]
    NoCandidates,
    #[error("candidate reliability {0} outside (0, 1]")]
    BadReliability(f64),
    #[error("xi_min {0} outside (0, 1)")]
    BadTarget(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("object {object} never reaches a TAP (success probability 0)")]
    NoAbsorption { object: usize },
    #[error("row {row} of [Q | R] sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("negative transition probability in row {row}")]
    Negative { row: usize },
    #[error("matrix dimensions do not match")]
    Shape,
    #[error("I - Q is singular; the chain is not absorbing")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("xi_min {0} must lie in (0, 1)")]
    BadReliabilityTarget(f64),
    #[error("lambda_p {0} must be positive")]
    BadRate(f64),
    #[error("empty search range [{w_min}, {w_max}]")]
    EmptyRange { w_min: usize, w_max: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error("object {object} needs duty cycle {duty} > 1")]
    Overload { object: usize, duty: f64 },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("replication with seed {seed}: {source}")]
    Replication {
        seed: u64,
        #[source]
        source: Box<SimError>,
    },
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("batch needs at least one replication")]
    NoReplications,
    #[error("thread pool: {0}")]
    Pool(String),
}
