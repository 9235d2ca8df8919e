//! Redundancy planning: switching interval, backup channel count, backup
//! TAP reliability and the channel-count surface over traffic ratios.

use nalgebra::DMatrix;

use crate::error::PlannerError;
use crate::markov::{expected_absorption_steps, AbsorbingChain};
use crate::topology::{select_backup_taps, TapCandidate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget {
    pub xi_min: f64,
    pub tau_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyPlan {
    pub t_w_star: f64,
    pub w_star: usize,
    pub n_a: usize,
    pub tap_set: Vec<usize>,
    pub achieved_reliability: f64,
    pub achieved_latency: f64,
}

/// Switching interval maximizing `t * (exp(-lambda_p t) - xi_min)`.
///
/// The stationary point solves `exp(-u) (1 - u) = xi_min` with
/// `u = lambda_p t`; the left side falls from 1 to 0 on `(0, 1)`, so
/// bisection on `u` finds the unique root.
pub fn switching_interval(lambda_p: f64, xi_min: f64) -> Result<f64, PlannerError> {
    if !(lambda_p > 0.0 && lambda_p.is_finite()) {
        return Err(PlannerError::BadRate(lambda_p));
    }
    if !(xi_min > 0.0 && xi_min < 1.0) {
        return Err(PlannerError::BadReliabilityTarget(xi_min));
    }
    let g = |u: f64| (-u).exp() * (1.0 - u) - xi_min;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 * hi.max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / lambda_p)
}

/// `w` in `[w_min, w_max]` minimizing `(tau_max - tau(w))²`; the smaller
/// `w` wins ties.
pub fn backup_channel_count<F>(tau_of_w: F, tau_max: f64, w_min: usize, w_max: usize) -> Result<usize, PlannerError>
where
    F: Fn(usize) -> f64,
{
    if w_min > w_max {
        return Err(PlannerError::EmptyRange { w_min, w_max });
    }
    let mut best = (w_min, f64::INFINITY);
    for w in w_min..=w_max {
        let err = (tau_max - tau_of_w(w)).powi(2);
        if err < best.1 {
            best = (w, err);
        }
    }
    Ok(best.0)
}

/// Reliability of `n_a` independent alternatives, `1 - (1 - xi)^n_a`.
pub fn tap_redundancy(xi: f64, n_a: usize) -> f64 {
    1.0 - (1.0 - xi).powi(n_a as i32)
}

/// Probability that an SU message with service rate `mu_s` completes before
/// a PU with arrival rate `lambda_p` returns.
pub fn per_attempt_reliability(mu_s: f64, lambda_p: f64) -> f64 {
    mu_s / (mu_s + lambda_p)
}

/// Channel knowledge at the edge: the fraction of would-be PU interruptions
/// the monitor foresees and avoids. `1` is ideal knowledge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeMonitor {
    pub prediction_accuracy: f64,
}

impl EdgeMonitor {
    pub const IDEAL: EdgeMonitor = EdgeMonitor {
        prediction_accuracy: 1.0,
    };

    /// Per-attempt reliability once foreseen interruptions are avoided.
    pub fn boost(&self, xi: f64) -> f64 {
        1.0 - (1.0 - xi) * (1.0 - self.prediction_accuracy)
    }
}

/// Smallest `w ≤ w_max` with `1 - (1 - xi)^(w n_a) ≥ xi_min`.
///
/// The comparison is made on failure probabilities so that `xi_min = 1`
/// is only met when an attempt can never fail.
pub fn minimal_channels(xi: f64, n_a: usize, xi_min: f64, w_max: usize) -> Option<usize> {
    let allowed_failure = 1.0 - xi_min;
    (1..=w_max).find(|&w| (1.0 - xi).powi((w * n_a) as i32) <= allowed_failure)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    /// `mu_s / lambda_p`
    pub ratio: f64,
    pub n_a: usize,
    pub xi_min: f64,
    /// `None` when no `w ≤ w_max` meets `xi_min`.
    pub min_w: Option<usize>,
}

/// Minimal channel count for every `(ratio, n_a, xi_min)` combination,
/// in that nesting order.
pub fn reliability_surface(
    ratios: &[f64],
    n_a_list: &[usize],
    xi_min_grid: &[f64],
    smart: Option<EdgeMonitor>,
    w_max: usize,
) -> Vec<SurfaceCell> {
    let mut cells = Vec::with_capacity(ratios.len() * n_a_list.len() * xi_min_grid.len());
    for &ratio in ratios {
        let mut xi = per_attempt_reliability(ratio, 1.0);
        if let Some(m) = smart {
            xi = m.boost(xi);
        }
        for &n_a in n_a_list {
            for &xi_min in xi_min_grid {
                cells.push(SurfaceCell {
                    ratio,
                    n_a,
                    xi_min,
                    min_w: minimal_channels(xi, n_a, xi_min, w_max),
                });
            }
        }
    }
    cells
}

/// Inputs of a single-link redundancy plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPlanInputs {
    pub lambda_p: f64,
    pub mu_s: f64,
    pub mu_p: f64,
    pub slot_duration: f64,
    /// Availability of each candidate TAP.
    pub tap_availabilities: Vec<f64>,
    pub w_min: usize,
    pub w_max: usize,
}

/// Expected latency of one link using `w` channels: absorption time of a
/// one-state retry chain whose slot succeeds when any channel is idle.
pub fn link_latency(lambda_p: f64, mu_p: f64, slot_duration: f64, w: usize) -> Result<f64, PlannerError> {
    let idle = mu_p / (mu_p + lambda_p);
    let p = 1.0 - (1.0 - idle).powi(w as i32);
    let chain = AbsorbingChain::new(
        DMatrix::from_element(1, 1, 1.0 - p),
        DMatrix::from_element(1, 1, p),
        slot_duration,
    )?;
    Ok(expected_absorption_steps(&chain)?[0] * slot_duration)
}

/// Plans switching interval, channel count and TAP set for one link.
pub fn plan_link(inputs: &LinkPlanInputs, target: ReliabilityTarget) -> Result<RedundancyPlan, PlannerError> {
    let t_w_star = switching_interval(inputs.lambda_p, target.xi_min)?;
    let xi = per_attempt_reliability(inputs.mu_s, inputs.lambda_p);

    let candidates: Vec<TapCandidate> = inputs
        .tap_availabilities
        .iter()
        .enumerate()
        .map(|(tap, a)| TapCandidate {
            tap,
            reliability: xi * a,
        })
        .collect();
    let selection = select_backup_taps(&candidates, target.xi_min)?;

    let latencies: Vec<f64> = (inputs.w_min..=inputs.w_max)
        .map(|w| link_latency(inputs.lambda_p, inputs.mu_p, inputs.slot_duration, w))
        .collect::<Result<_, _>>()?;
    let w_star = backup_channel_count(
        |w| latencies[w - inputs.w_min],
        target.tau_max,
        inputs.w_min,
        inputs.w_max,
    )?;

    // Every channel of every selected TAP is an independent alternative.
    let per_channel = 1.0 - selection.reliability;
    let achieved_reliability = 1.0 - per_channel.powi(w_star as i32);
    Ok(RedundancyPlan {
        t_w_star,
        w_star,
        n_a: selection.taps.len(),
        tap_set: selection.taps,
        achieved_reliability,
        achieved_latency: latencies[w_star - inputs.w_min],
    })
}
