//! Monte Carlo replications of the whole pipeline and their aggregation.
//!
//! A replication places nodes, optionally lets the TAPs monitor PU
//! activity, forms the topology, solves the absorbing chain for latency,
//! accounts power and finally sends messages through the redundant links to
//! measure delivery without PU interruption.
//!
//! Replication `k` of a batch runs with `derive_seed(base_seed, k)`. Each
//! replication draws from independent ChaCha8 streams of that seed (one per
//! stage), so switching a variant on or off does not perturb the random
//! numbers used by the other stages.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{SimError, ValidationError};
use crate::markov::{build_chain, latency_breakdown, LatencyBreakdown};
use crate::power::{mean_power, PowerBreakdown, PowerParams};
use crate::scenario::{build_scenario, place_nodes, Scenario};
use crate::spectrum::{monitor_update, sample_pu_trace, smart_assign, ChannelEstimate, ChannelProcess, LinkScales};
use crate::topology::{form_topology, AssociationPolicy};

const STREAM_PLACEMENT: u64 = 0;
const STREAM_MONITOR: u64 = 1;
const STREAM_ACCESS: u64 = 2;
const STREAM_MESSAGES: u64 = 3;

/// Simulation knobs from the `[experiment]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Messages sent per replication to measure reliability.
    pub messages_per_rep: u64,
    /// How long TAPs observe each channel before assigning, smart mode only.
    pub monitor_horizon: f64,
    /// Fraction of PU interruptions the edge monitor foresees.
    pub smart_accuracy: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            messages_per_rep: 1000,
            monitor_horizon: 200.0,
            smart_accuracy: 1.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.messages_per_rep == 0 {
            return Err(ValidationError::new("messages_per_rep", "must be at least 1"));
        }
        if !(self.monitor_horizon.is_finite() && self.monitor_horizon > 0.0) {
            return Err(ValidationError::new("monitor_horizon", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.smart_accuracy) {
            return Err(ValidationError::new("smart_accuracy", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Everything a replication needs besides its options and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSetup {
    pub scenario: Scenario,
    pub power: PowerParams,
    pub params: SimParams,
}

impl SimSetup {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self, ValidationError> {
        config.validate()?;
        Ok(Self {
            scenario: build_scenario(config)?,
            power: config.power.clone(),
            params: config.experiment.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub smart: bool,
    pub d2d: bool,
    /// Channels per link.
    pub w: usize,
    /// TAPs per object.
    pub n_a: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            smart: false,
            d2d: false,
            w: 1,
            n_a: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub seed: u64,
    pub latency: LatencyBreakdown,
    pub power: PowerBreakdown,
    pub reliability_empirical: f64,
    pub signaling_messages: u64,
    pub unassigned: usize,
}

/// Metric names, in the order used by summaries and CSV output.
pub const METRICS: [&str; 11] = [
    "tau_o",
    "tau_p",
    "tau_a",
    "tau_total",
    "p_tx",
    "p_compute",
    "p_storage",
    "p_switching",
    "p_total",
    "reliability",
    "signaling_messages",
];

impl ReplicationResult {
    pub fn metric_values(&self) -> [f64; METRICS.len()] {
        [
            self.latency.tau_o,
            self.latency.tau_p,
            self.latency.tau_a,
            self.latency.tau_total,
            self.power.p_tx_mean,
            self.power.p_compute_mean,
            self.power.p_storage_mean,
            self.power.p_switching_mean,
            self.power.p_total_mean,
            self.reliability_empirical,
            self.signaling_messages as f64,
        ]
    }
}

/// SplitMix64 finalizer: a bijection on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `k`: `splitmix64(base_seed ^ k)`. Distinct `k` give
/// distinct seeds for a fixed base.
pub fn derive_seed(base_seed: u64, k: u64) -> u64 {
    splitmix64(base_seed ^ k)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn channels_for(setup: &SimSetup, scales: Arc<LinkScales>) -> Vec<ChannelProcess> {
    let t = &setup.scenario.traffic;
    (0..setup.scenario.n_channels)
        .map(|b| ChannelProcess::new(b, t.lambda_p, t.mu_p).with_scales(scales.clone()))
        .collect()
}

/// Fraction of messages delivered when each has `attempts` independent
/// chances, each interrupted if a PU returns before the message completes.
/// With smart assignment a foreseen interruption is avoided.
fn delivered_fraction<R: Rng + ?Sized>(setup: &SimSetup, attempts: usize, smart: bool, rng: &mut R) -> f64 {
    let t = &setup.scenario.traffic;
    let n = setup.params.messages_per_rep;
    if t.lambda_p == 0.0 {
        return 1.0;
    }
    let service = Exp::new(t.mu_s).expect("positive rate");
    let pu = Exp::new(t.lambda_p).expect("positive rate");
    let accuracy = if smart { setup.params.smart_accuracy } else { 0.0 };
    let delivered = (0..n)
        .filter(|_| {
            (0..attempts).any(|_| {
                let done = service.sample(rng) < pu.sample(rng);
                done || rng.random::<f64>() < accuracy
            })
        })
        .count();
    delivered as f64 / n as f64
}

/// Runs one replication end to end. Deterministic in `seed`.
pub fn run_replication(setup: &SimSetup, options: &RunOptions, seed: u64) -> Result<ReplicationResult, SimError> {
    let inner = || -> Result<ReplicationResult, SimError> {
        let scenario = &setup.scenario;
        let placed = place_nodes(scenario, &mut stream(seed, STREAM_PLACEMENT));
        let scales = Arc::new(LinkScales::from_geometry(&placed, setup.power.min_distance));
        let channels = channels_for(setup, scales);

        let mut policy = AssociationPolicy::new(options.w, options.n_a);
        if options.smart {
            let mut rng = stream(seed, STREAM_MONITOR);
            let estimates: Vec<ChannelEstimate> = channels
                .iter()
                .map(|ch| {
                    let trace = sample_pu_trace(ch, setup.params.monitor_horizon, &mut rng);
                    monitor_update(&ChannelEstimate::new(ch.channel_id), &trace)
                })
                .collect();
            policy.channel_ranking = Some(smart_assign(&estimates, scenario.traffic.msg_duration())?);
        }

        let topology = form_topology(&placed, &channels, &policy);
        let chain = build_chain(&topology, &placed, &channels, options.smart)?;
        let latency = latency_breakdown(
            scenario,
            &topology,
            &chain,
            options.d2d,
            &mut stream(seed, STREAM_ACCESS),
        )?;
        let power = mean_power(&placed, &topology, &latency, &setup.power)?;
        let reliability_empirical = delivered_fraction(
            setup,
            options.w.max(1) * options.n_a.max(1),
            options.smart,
            &mut stream(seed, STREAM_MESSAGES),
        );

        Ok(ReplicationResult {
            seed,
            latency,
            power,
            reliability_empirical,
            signaling_messages: topology.signaling_messages,
            unassigned: topology.assignments.iter().filter(|a| a.is_none()).count(),
        })
    };
    inner().map_err(|e| SimError::Replication {
        seed,
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub std_err: f64,
    /// `1.96 * std_err`
    pub ci_half_width: f64,
    pub n: usize,
}

impl MetricStat {
    /// Mean and standard error of `values`. A single value has standard
    /// error 0.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_err,
            ci_half_width: 1.96 * std_err,
            n,
        }
    }

    pub fn ci_low(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.ci_half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    /// One entry per name in [`METRICS`].
    pub stats: Vec<MetricStat>,
    pub replications: usize,
}

impl MetricsSummary {
    pub fn from_results(results: &[ReplicationResult]) -> Self {
        let rows: Vec<[f64; METRICS.len()]> = results.iter().map(ReplicationResult::metric_values).collect();
        let stats = (0..METRICS.len())
            .map(|m| MetricStat::from_values(&rows.iter().map(|r| r[m]).collect::<Vec<_>>()))
            .collect();
        Self {
            stats,
            replications: results.len(),
        }
    }

    pub fn get(&self, metric: &str) -> Option<&MetricStat> {
        METRICS.iter().position(|m| *m == metric).map(|k| &self.stats[k])
    }

    /// Like [`get`](Self::get) for names known to exist.
    pub fn metric(&self, metric: &str) -> &MetricStat {
        self.get(metric).unwrap_or_else(|| panic!("unknown metric {metric}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub summary: MetricsSummary,
    /// In seed-derivation order.
    pub replications: Vec<ReplicationResult>,
}

/// Runs `n_reps` replications on up to `parallelism` threads. Results are
/// merged in replication order, so the summary does not depend on the
/// thread count.
pub fn run_batch(
    setup: &SimSetup,
    options: &RunOptions,
    n_reps: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<BatchResult, SimError> {
    if n_reps == 0 {
        return Err(SimError::NoReplications);
    }
    let seeds: Vec<u64> = (0..n_reps as u64).map(|k| derive_seed(base_seed, k)).collect();
    let outcomes: Vec<Result<ReplicationResult, SimError>> = if parallelism <= 1 {
        seeds.iter().map(|&s| run_replication(setup, options, s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))?;
        pool.install(|| seeds.par_iter().map(|&s| run_replication(setup, options, s)).collect())
    };
    let replications = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BatchResult {
        summary: MetricsSummary::from_results(&replications),
        replications,
    })
}

/// Mean total latency when every link uses `w` channels, for
/// `w = 1..=w_max`. Feeds the backup-channel optimizer.
pub fn latency_vs_channels(
    setup: &SimSetup,
    options: &RunOptions,
    w_max: usize,
    n_reps: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<Vec<f64>, SimError> {
    (1..=w_max)
        .map(|w| {
            let opts = RunOptions { w, ..*options };
            run_batch(setup, &opts, n_reps, base_seed, parallelism).map(|b| b.summary.metric("tau_total").mean)
        })
        .collect()
}
