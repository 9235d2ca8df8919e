//! Simulation and redundancy planning for edge networks in which IoT
//! objects reach the Internet through user terminals acting as access
//! points (TAPs), over channels borrowed opportunistically from primary
//! users.
//!
//! The pipeline of one replication:
//!
//! - [`scenario`]: objects, TAPs, channels and traffic; random placement.
//! - [`spectrum`]: PU on/off activity, channel availability, edge monitoring.
//! - [`topology`]: object → TAP/channel association and backup TAP sets.
//! - [`markov`]: absorbing-chain latency and its breakdown.
//! - [`power`]: transmission, computation and storage power.
//! - [`sim`]: replications and seed-stable parallel batches.
//!
//! [`planner`] holds the redundancy optimizers and [`experiments`] the
//! sweeps that produce the CSV tables in [`results`].

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod markov;
pub mod planner;
pub mod power;
pub mod results;
pub mod scenario;
pub mod sim;
pub mod spectrum;
pub mod topology;

pub use config::ScenarioConfig;
pub use error::{
    ConfigError, MarkovError, PlannerError, PowerError, SimError, SpectrumError, TopologyError, ValidationError,
};
pub use markov::{AbsorbingChain, LatencyBreakdown};
pub use planner::{EdgeMonitor, RedundancyPlan, ReliabilityTarget};
pub use power::{PowerBreakdown, PowerParams};
pub use scenario::{PlacedScenario, Scenario};
pub use sim::{MetricsSummary, ReplicationResult, RunOptions, SimParams, SimSetup};
pub use topology::Topology;
