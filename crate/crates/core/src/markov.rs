//! Absorbing Markov chain of messages travelling toward TAPs, and the
//! end-to-end latency built on top of it.
//!
//! Each object with an assignment is one transient state. Per slot the
//! message reaches its TAP (an absorbing state) with probability `p_i` and
//! otherwise retries. The expected time to absorption is read from the
//! fundamental matrix `N = (I - Q)^-1`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::MarkovError;
use crate::scenario::{PlacedScenario, Scenario};
use crate::spectrum::{availability, transmission_survival, ChannelProcess, Link};
use crate::topology::Topology;

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingChain {
    pub n_transient: usize,
    pub n_absorbing: usize,
    /// Transient → transient probabilities.
    pub q: DMatrix<f64>,
    /// Transient → absorbing probabilities.
    pub r: DMatrix<f64>,
    pub slot_duration: f64,
    /// Object id behind each transient state.
    pub objects: Vec<usize>,
}

impl AbsorbingChain {
    /// Validates shape, non-negativity, unit row sums and certain absorption.
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>, slot_duration: f64) -> Result<Self, MarkovError> {
        let n = q.nrows();
        if q.ncols() != n || r.nrows() != n {
            return Err(MarkovError::Shape);
        }
        for row in 0..n {
            let entries = q.row(row).iter().chain(r.row(row).iter()).copied().collect::<Vec<_>>();
            if entries.iter().any(|v| *v < 0.0 || v.is_nan()) {
                return Err(MarkovError::Negative { row });
            }
            let sum: f64 = entries.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(MarkovError::RowSum { row, sum });
            }
        }
        let chain = Self {
            n_transient: n,
            n_absorbing: r.ncols(),
            q,
            r,
            slot_duration,
            objects: (0..n).collect(),
        };
        let fundamental = chain.fundamental_matrix()?;
        if fundamental.iter().any(|v| *v < -ROW_SUM_TOL || !v.is_finite()) {
            return Err(MarkovError::Singular);
        }
        Ok(chain)
    }

    fn i_minus_q(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n_transient, self.n_transient) - &self.q
    }

    /// `N = (I - Q)^-1`; entry `(i, k)` is the expected number of visits to
    /// `k` starting from `i`.
    pub fn fundamental_matrix(&self) -> Result<DMatrix<f64>, MarkovError> {
        self.i_minus_q().try_inverse().ok_or(MarkovError::Singular)
    }

    /// Probability of ending in each absorbing state, `N R`.
    pub fn absorption_probabilities(&self) -> Result<DMatrix<f64>, MarkovError> {
        Ok(self.fundamental_matrix()? * &self.r)
    }
}

/// Per-slot success probability of a link that may use any of `channels`:
/// the TAP must be available and at least one channel must carry the
/// message. With `smart`, each channel's blind availability is replaced by
/// the chance that the monitored channel stays free for a whole message,
/// unless blind access is already at least as good.
pub fn link_success(
    placed: &PlacedScenario,
    link: Link,
    channels: &[ChannelProcess],
    used: &[usize],
    smart: bool,
) -> f64 {
    let tap_avail = placed.scenario.tap_profiles[link.tap].availability;
    let msg = placed.scenario.traffic.msg_duration();
    let all_fail: f64 = used
        .iter()
        .map(|&b| {
            let ch = &channels[b];
            let blind = availability(link, ch);
            let p = if smart {
                blind.max(transmission_survival(ch.link_rate(link), msg))
            } else {
                blind
            };
            1.0 - p
        })
        .product();
    tap_avail * (1.0 - all_fail)
}

/// One transient state per assigned object; unassigned objects are left out.
pub fn build_chain(
    topology: &Topology,
    placed: &PlacedScenario,
    channels: &[ChannelProcess],
    smart: bool,
) -> Result<AbsorbingChain, MarkovError> {
    let states: Vec<(usize, usize, f64)> = topology
        .assigned()
        .map(|(i, a)| {
            let p = link_success(placed, Link::new(i, a.tap), channels, &topology.link_channels(i), smart);
            (i, a.tap, p)
        })
        .collect();
    if let Some(&(object, _, _)) = states.iter().find(|s| s.2 <= 0.0) {
        return Err(MarkovError::NoAbsorption { object });
    }
    let n = states.len();
    let n_tap = placed.tap_positions.len();
    let mut q = DMatrix::zeros(n, n);
    let mut r = DMatrix::zeros(n, n_tap);
    for (k, &(_, tap, p)) in states.iter().enumerate() {
        q[(k, k)] = 1.0 - p;
        r[(k, tap)] = p;
    }
    let mut chain = AbsorbingChain::new(q, r, placed.scenario.traffic.slot_duration)?;
    chain.objects = states.iter().map(|s| s.0).collect();
    Ok(chain)
}

/// Expected steps to absorption from each transient state, `N · 1`.
pub fn expected_absorption_steps(chain: &AbsorbingChain) -> Result<Vec<f64>, MarkovError> {
    if chain.n_transient == 0 {
        return Ok(Vec::new());
    }
    let ones = DVector::from_element(chain.n_transient, 1.0);
    let t = chain.i_minus_q().lu().solve(&ones).ok_or(MarkovError::Singular)?;
    Ok(t.iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatencyBreakdown {
    pub tau_o: f64,
    pub tau_p: f64,
    pub tau_a: f64,
    pub tau_total: f64,
}

impl LatencyBreakdown {
    pub fn new(tau_o: f64, tau_p: f64, tau_a: f64) -> Self {
        Self {
            tau_o,
            tau_p,
            tau_a,
            tau_total: tau_o + tau_p + tau_a,
        }
    }
}

/// Mean latency over assigned objects (`tau_o`, `tau_p`) and end-users
/// (`tau_a`).
///
/// Pre-processing runs under processor sharing: `tau_p` of an object is
/// `msg_size * tau_p_per_unit * max(1, load / compute_capacity)` for the
/// load on its TAP. With `d2d`, each user is served by a neighbour with
/// probability `p_share` and waits `tau_d2d`; the rest go through the TAPs,
/// whose access delay grows as `max(1, users / (n_tap * access_capacity))`
/// when an access capacity is set.
pub fn latency_breakdown<R: Rng + ?Sized>(
    scenario: &Scenario,
    topology: &Topology,
    chain: &AbsorbingChain,
    d2d: bool,
    rng: &mut R,
) -> Result<LatencyBreakdown, MarkovError> {
    let steps = expected_absorption_steps(chain)?;
    let tau_o = mean(steps.iter().map(|s| s * chain.slot_duration));

    let loads = topology.tap_loads(scenario.n_tap);
    let base_p = scenario.msg_size * scenario.traffic.tau_p_per_unit;
    let tau_p = mean(topology.assigned().map(|(_, a)| {
        let cap = scenario.tap_profiles[a.tap].compute_capacity;
        base_p * (loads[a.tap] as f64 / cap).max(1.0)
    }));

    let t = &scenario.traffic;
    let shared: Vec<bool> = (0..scenario.n_users)
        .map(|_| d2d && rng.random::<f64>() < t.p_share)
        .collect();
    let via_taps = shared.iter().filter(|s| !**s).count();
    let congestion = match t.access_capacity {
        Some(cap) => (via_taps as f64 / (scenario.n_tap as f64 * cap)).max(1.0),
        None => 1.0,
    };
    let tau_a = mean(
        shared
            .iter()
            .map(|&s| if s { t.tau_d2d } else { t.tau_a_base * congestion }),
    );

    Ok(LatencyBreakdown::new(tau_o, tau_p, tau_a))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
