//! Primary-user channel activity.
//!
//! Each channel alternates between idle periods, exponential with rate
//! `lambda_p`, and busy periods, exponential with rate `mu_p`. A link's
//! effective PU arrival rate is `lambda_p` times a per-link multiplier.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::SpectrumError;
use crate::scenario::PlacedScenario;

/// An (object, TAP) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Link {
    pub object: usize,
    pub tap: usize,
}

impl Link {
    pub fn new(object: usize, tap: usize) -> Self {
        Self { object, tap }
    }
}

/// Per-link multipliers on the PU arrival rate. Missing entries are 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkScales {
    n_tap: usize,
    values: Vec<f64>,
}

impl LinkScales {
    pub fn uniform() -> Self {
        Self::default()
    }

    /// Dense `n_o × n_tap` table, row-major by object.
    pub fn from_dense(n_tap: usize, values: Vec<f64>) -> Self {
        assert!(values.iter().all(|v| *v >= 0.0), "link scales must be non-negative");
        assert!(n_tap == 0 || values.len().is_multiple_of(n_tap));
        Self { n_tap, values }
    }

    /// Multiplier `(max(d, d_min) / d_ref)^exponent` from link geometry.
    pub fn from_geometry(placed: &PlacedScenario, d_min: f64) -> Self {
        let t = &placed.scenario.traffic;
        if t.pu_distance_exponent == 0.0 {
            return Self::uniform();
        }
        let n_tap = placed.tap_positions.len();
        let values = (0..placed.object_positions.len())
            .flat_map(|i| (0..n_tap).map(move |j| (i, j)))
            .map(|(i, j)| (placed.distance(i, j).max(d_min) / t.pu_reference_distance).powf(t.pu_distance_exponent))
            .collect();
        Self { n_tap, values }
    }

    pub fn get(&self, link: Link) -> f64 {
        if self.values.is_empty() {
            return 1.0;
        }
        self.values
            .get(link.object * self.n_tap + link.tap)
            .copied()
            .unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProcess {
    pub channel_id: usize,
    pub lambda_p: f64,
    pub mu_p: f64,
    pub per_link_scale: Arc<LinkScales>,
}

impl ChannelProcess {
    pub fn new(channel_id: usize, lambda_p: f64, mu_p: f64) -> Self {
        assert!(lambda_p >= 0.0 && mu_p > 0.0);
        Self {
            channel_id,
            lambda_p,
            mu_p,
            per_link_scale: Arc::new(LinkScales::uniform()),
        }
    }

    pub fn with_scales(mut self, scales: Arc<LinkScales>) -> Self {
        self.per_link_scale = scales;
        self
    }

    /// PU arrival rate seen on `link`.
    pub fn link_rate(&self, link: Link) -> f64 {
        self.lambda_p * self.per_link_scale.get(link)
    }
}

/// Stationary idle probability of the PU on/off process on `link`:
/// `mu_p / (mu_p + lambda_p * scale)`.
pub fn availability(link: Link, channel: &ChannelProcess) -> f64 {
    let rate = channel.link_rate(link);
    channel.mu_p / (channel.mu_p + rate)
}

/// Probability that no PU arrives during `duration`.
pub fn transmission_survival(lambda_p: f64, duration: f64) -> f64 {
    debug_assert!(duration >= 0.0);
    (-lambda_p * duration).exp()
}

/// Busy periods of one channel over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PuEventTrace {
    pub channel_id: usize,
    pub horizon: f64,
    /// `(arrival, departure)` pairs, sorted and disjoint. An interval that
    /// starts at exactly 0 was already busy when observation began.
    pub busy: Vec<(f64, f64)>,
}

impl PuEventTrace {
    pub fn busy_time(&self) -> f64 {
        self.busy.iter().map(|(a, d)| d - a).sum()
    }

    pub fn idle_time(&self) -> f64 {
        self.horizon - self.busy_time()
    }

    /// PU arrivals that happened inside the window.
    pub fn arrivals(&self) -> usize {
        self.busy.iter().filter(|(a, _)| *a > 0.0).count()
    }
}

/// Samples the on/off process over `[0, horizon]`, starting from its
/// stationary state.
pub fn sample_pu_trace<R: Rng + ?Sized>(channel: &ChannelProcess, horizon: f64, rng: &mut R) -> PuEventTrace {
    assert!(horizon > 0.0, "horizon must be positive");
    let mut busy = Vec::new();
    if channel.lambda_p > 0.0 {
        let idle = Exp::new(channel.lambda_p).expect("positive rate");
        let hold = Exp::new(channel.mu_p).expect("positive rate");
        let p_busy = channel.lambda_p / (channel.lambda_p + channel.mu_p);
        let mut t = 0.0;
        let mut is_busy = rng.random::<f64>() < p_busy;
        while t < horizon {
            if is_busy {
                let end = (t + hold.sample(rng)).min(horizon);
                busy.push((t, end));
                t = end;
            } else {
                t += idle.sample(rng);
            }
            is_busy = !is_busy;
        }
    }
    PuEventTrace {
        channel_id: channel.channel_id,
        horizon,
        busy,
    }
}

/// Running PU arrival-rate estimate for one channel, as kept by a TAP.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub channel_id: usize,
    pub lambda_hat: f64,
    /// PU arrivals observed so far.
    pub n_obs: usize,
    /// Total observed duration.
    pub window: f64,
    /// Observed idle time, the exposure for arrivals.
    pub idle_time: f64,
}

impl ChannelEstimate {
    pub fn new(channel_id: usize) -> Self {
        Self {
            channel_id,
            lambda_hat: 0.0,
            n_obs: 0,
            window: 0.0,
            idle_time: 0.0,
        }
    }
}

/// Folds a trace into the estimate: `lambda_hat` is arrivals per unit of
/// idle time over everything observed so far.
pub fn monitor_update(estimate: &ChannelEstimate, trace: &PuEventTrace) -> ChannelEstimate {
    assert_eq!(estimate.channel_id, trace.channel_id, "trace from another channel");
    let n_obs = estimate.n_obs + trace.arrivals();
    let idle_time = estimate.idle_time + trace.idle_time();
    let lambda_hat = if idle_time > 0.0 {
        n_obs as f64 / idle_time
    } else {
        estimate.lambda_hat
    };
    ChannelEstimate {
        channel_id: estimate.channel_id,
        lambda_hat,
        n_obs,
        window: estimate.window + trace.horizon,
        idle_time,
    }
}

/// Ranks channels by the probability that they stay free for
/// `msg_duration`, best first; equal survival goes to the lower id.
pub fn smart_assign(channels: &[ChannelEstimate], msg_duration: f64) -> Result<Vec<usize>, SpectrumError> {
    if channels.is_empty() {
        return Err(SpectrumError::NoChannels);
    }
    let mut ranked: Vec<(f64, usize)> = channels
        .iter()
        .map(|c| (transmission_survival(c.lambda_hat, msg_duration), c.channel_id))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(ranked.into_iter().map(|(_, id)| id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const L: Link = Link { object: 0, tap: 0 };

    #[test]
    fn availability_edges() {
        assert_eq!(availability(L, &ChannelProcess::new(0, 0.0, 3.0)), 1.0);
        assert_eq!(availability(L, &ChannelProcess::new(0, 2.0, 2.0)), 0.5);
        let a = availability(L, &ChannelProcess::new(0, 1.0, 6.0));
        assert!((a - 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn link_scale_applies_per_link() {
        let scales = Arc::new(LinkScales::from_dense(2, vec![1.0, 3.0]));
        let ch = ChannelProcess::new(0, 1.0, 3.0).with_scales(scales);
        assert_eq!(availability(Link::new(0, 0), &ch), 0.75);
        assert_eq!(availability(Link::new(0, 1), &ch), 0.5);
    }

    // Long-run idle fraction of a simulated trace against the closed form.
    #[test]
    fn availability_matches_long_trace() {
        let ch = ChannelProcess::new(0, 1.0, 6.0);
        let trace = sample_pu_trace(&ch, 1e6, &mut ChaCha8Rng::seed_from_u64(11));
        let idle = trace.idle_time() / trace.horizon;
        assert!((idle - availability(L, &ch)).abs() < 0.005, "idle fraction {idle}");
    }

    #[test]
    fn survival_values() {
        assert_eq!(transmission_survival(3.0, 0.0), 1.0);
        assert!((transmission_survival(1.0, 2f64.ln()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn survival_matches_sampled_interarrivals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let exp = Exp::new(1.0).unwrap();
        let n = 100_000;
        let hits = (0..n).filter(|_| exp.sample(&mut rng) > 0.05).count();
        let p = (-0.05f64).exp();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let frac = hits as f64 / n as f64;
        assert!((frac - transmission_survival(1.0, 0.05)).abs() < 3.0 * sigma, "{frac}");
    }

    #[test]
    fn trace_without_pus_is_empty() {
        let trace = sample_pu_trace(
            &ChannelProcess::new(2, 0.0, 1.0),
            100.0,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(trace.busy.is_empty());
        assert_eq!(trace.channel_id, 2);
    }

    #[test]
    fn trace_busy_fraction_and_shape() {
        let ch = ChannelProcess::new(0, 2.0, 2.0);
        let trace = sample_pu_trace(&ch, 1e5, &mut ChaCha8Rng::seed_from_u64(9));
        let frac = trace.busy_time() / trace.horizon;
        assert!((frac - 0.5).abs() < 0.01, "busy fraction {frac}");
        for w in trace.busy.windows(2) {
            assert!(w[0].1 < w[1].0);
        }
        for (a, d) in &trace.busy {
            assert!(0.0 <= *a && a < d && *d <= trace.horizon);
        }
    }

    #[test]
    fn trace_is_deterministic() {
        let ch = ChannelProcess::new(0, 1.0, 2.0);
        let a = sample_pu_trace(&ch, 500.0, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_pu_trace(&ch, 500.0, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn monitor_counts() {
        let empty = PuEventTrace {
            channel_id: 0,
            horizon: 30.0,
            busy: vec![],
        };
        let est = monitor_update(&ChannelEstimate::new(0), &empty);
        assert_eq!(est.lambda_hat, 0.0);
        assert_eq!(est.window, 30.0);

        // 100 arrivals, 50 units of idle time.
        let busy: Vec<_> = (0..100).map(|k| (0.5 + k as f64, 1.0 + k as f64)).collect();
        let trace = PuEventTrace {
            channel_id: 0,
            horizon: 100.0,
            busy,
        };
        let est = monitor_update(&ChannelEstimate::new(0), &trace);
        assert_eq!(est.n_obs, 100);
        assert!((est.lambda_hat - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monitor_accumulates() {
        let t1 = PuEventTrace {
            channel_id: 1,
            horizon: 10.0,
            busy: vec![(1.0, 2.0)],
        };
        let t2 = PuEventTrace {
            channel_id: 1,
            horizon: 10.0,
            busy: vec![(0.0, 1.0), (4.0, 5.0), (6.0, 7.0)],
        };
        let est = monitor_update(&monitor_update(&ChannelEstimate::new(1), &t1), &t2);
        // Interval starting at 0 is not an observed arrival.
        assert_eq!(est.n_obs, 3);
        assert!((est.lambda_hat - 3.0 / 16.0).abs() < 1e-15);
    }

    // Estimator consistency over independent traces: the mean converges to
    // the true rate and the spread follows lambda / sqrt(n_obs).
    #[test]
    fn monitor_estimate_is_consistent() {
        let ch = ChannelProcess::new(0, 1.0, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let reps = 1000;
        let ests: Vec<ChannelEstimate> = (0..reps)
            .map(|_| monitor_update(&ChannelEstimate::new(0), &sample_pu_trace(&ch, 400.0, &mut rng)))
            .collect();
        let mean = ests.iter().map(|e| e.lambda_hat).sum::<f64>() / reps as f64;
        let var = ests.iter().map(|e| (e.lambda_hat - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let mean_obs = ests.iter().map(|e| e.n_obs as f64).sum::<f64>() / reps as f64;
        let predicted_se = 1.0 / mean_obs.sqrt();
        assert!(
            (mean - 1.0).abs() < 4.0 * predicted_se / (reps as f64).sqrt() + 0.01,
            "mean {mean}"
        );
        let ratio = var.sqrt() / predicted_se;
        assert!((0.85..1.15).contains(&ratio), "spread ratio {ratio}");
    }

    fn estimates(rates: &[f64]) -> Vec<ChannelEstimate> {
        rates
            .iter()
            .enumerate()
            .map(|(id, &r)| ChannelEstimate {
                lambda_hat: r,
                ..ChannelEstimate::new(id)
            })
            .collect()
    }

    #[test]
    fn smart_assign_orders() {
        assert_eq!(smart_assign(&estimates(&[0.7]), 0.1).unwrap(), vec![0]);
        assert_eq!(smart_assign(&estimates(&[2.0, 0.5]), 0.1).unwrap(), vec![1, 0]);
        assert_eq!(smart_assign(&estimates(&[1.0, 1.0, 0.2]), 0.1).unwrap(), vec![2, 0, 1]);
        assert_eq!(smart_assign(&[], 0.1), Err(SpectrumError::NoChannels));
    }

    proptest! {
        #[test]
        fn availability_is_monotone(l1 in 0.0..20.0f64, dl in 0.0..5.0f64, m1 in 0.01..20.0f64, dm in 0.0..5.0f64) {
            let a = availability(L, &ChannelProcess::new(0, l1, m1));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(availability(L, &ChannelProcess::new(0, l1 + dl, m1)) <= a);
            prop_assert!(availability(L, &ChannelProcess::new(0, l1, m1 + dm)) >= a);
        }

        #[test]
        fn survival_is_multiplicative(l in 0.0..10.0f64, t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
            let lhs = transmission_survival(l, t1 + t2);
            let rhs = transmission_survival(l, t1) * transmission_survival(l, t2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300) + 1e-300);
        }

        // First-ranked channel attains the maximum survival; ranking is
        // invariant under a common scaling of the estimates.
        #[test]
        fn smart_assign_argmax(rates in prop::collection::vec(0.0..10.0f64, 1..8), k in 0.1..10.0f64, d in 0.01..2.0f64) {
            let est = estimates(&rates);
            let order = smart_assign(&est, d).unwrap();
            let best = rates.iter().map(|&r| transmission_survival(r, d)).fold(f64::MIN, f64::max);
            prop_assert_eq!(transmission_survival(rates[order[0]], d), best);
            for w in order.windows(2) {
                prop_assert!(transmission_survival(rates[w[0]], d) >= transmission_survival(rates[w[1]], d));
            }
            let scaled: Vec<f64> = rates.iter().map(|r| r * k).collect();
            prop_assert_eq!(smart_assign(&estimates(&scaled), d).unwrap(), order);
        }
    }
}
