//! Mean power for transmission, computation and storage.

use serde::{Deserialize, Serialize};

use crate::error::{PowerError, ValidationError};
use crate::markov::LatencyBreakdown;
use crate::scenario::PlacedScenario;
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerParams {
    /// Radiated power while transmitting, W.
    pub tx_power_w: f64,
    /// Messages per unit time per object.
    pub msg_rate: f64,
    /// Energy per payload unit of pre-processing, J.
    pub e_compute_per_unit: f64,
    /// Power per payload unit held in storage, W.
    pub p_storage_per_unit: f64,
    pub path_loss_exponent: f64,
    /// Reference distance `d0` of the path-loss model, m.
    pub reference_distance: f64,
    /// Linear SNR at `d0`.
    pub reference_snr: f64,
    /// Distances below this are clamped, m.
    pub min_distance: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            tx_power_w: 0.75,
            msg_rate: 1e-4,
            e_compute_per_unit: 5.0,
            p_storage_per_unit: 1.0,
            path_loss_exponent: 3.0,
            reference_distance: 1.0,
            reference_snr: 1e3,
            min_distance: 0.1,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let fields = [
            ("tx_power_w", self.tx_power_w),
            ("msg_rate", self.msg_rate),
            ("e_compute_per_unit", self.e_compute_per_unit),
            ("p_storage_per_unit", self.p_storage_per_unit),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ValidationError::new(name, format!("must be non-negative, got {v}")));
            }
        }
        let positive = [
            ("path_loss_exponent", self.path_loss_exponent),
            ("reference_distance", self.reference_distance),
            ("reference_snr", self.reference_snr),
            ("min_distance", self.min_distance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ValidationError::new(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Spectral efficiency at distance `d`: `log2(1 + snr0 (d0 / d)^alpha)`,
    /// with `d` clamped to `min_distance`.
    pub fn rate(&self, d: f64) -> f64 {
        let d = d.max(self.min_distance);
        (1.0 + self.reference_snr * (self.reference_distance / d).powf(self.path_loss_exponent)).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBreakdown {
    pub p_tx_mean: f64,
    pub p_compute_mean: f64,
    pub p_storage_mean: f64,
    /// Channel switching is not charged; always 0.
    pub p_switching_mean: f64,
    pub p_total_mean: f64,
}

impl PowerBreakdown {
    fn new(p_tx_mean: f64, p_compute_mean: f64, p_storage_mean: f64) -> Self {
        let p_switching_mean = 0.0;
        Self {
            p_tx_mean,
            p_compute_mean,
            p_storage_mean,
            p_switching_mean,
            p_total_mean: p_tx_mean + p_compute_mean + p_storage_mean + p_switching_mean,
        }
    }
}

/// Mean power per assigned object.
///
/// Transmission draws `tx_power_w` for a duty cycle of
/// `msg_rate * msg_size / rate(d)` on the link to the assigned TAP.
/// Pre-processing costs `e_compute_per_unit` per payload unit. Payload
/// resident in the network, `msg_rate * msg_size * tau_total`, is charged
/// `p_storage_per_unit`. A duty cycle above 1 is an error.
pub fn mean_power(
    placed: &PlacedScenario,
    topology: &Topology,
    latency: &LatencyBreakdown,
    params: &PowerParams,
) -> Result<PowerBreakdown, PowerError> {
    let msg_size = placed.scenario.msg_size;
    let mut tx = 0.0;
    let mut n = 0usize;
    for (i, a) in topology.assigned() {
        let airtime = msg_size / params.rate(placed.distance(i, a.tap));
        let duty = params.msg_rate * airtime;
        if duty > 1.0 {
            return Err(PowerError::Overload { object: i, duty });
        }
        tx += params.tx_power_w * duty;
        n += 1;
    }
    if n == 0 {
        return Ok(PowerBreakdown::default());
    }
    let compute = params.e_compute_per_unit * msg_size * params.msg_rate;
    let storage = params.p_storage_per_unit * msg_size * params.msg_rate * latency.tau_total;
    Ok(PowerBreakdown::new(tx / n as f64, compute, storage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::scenario::{build_scenario, place_nodes, Point};
    use crate::spectrum::ChannelProcess;
    use crate::topology::{form_topology, AssociationPolicy};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (PlacedScenario, Topology) {
        let mut cfg = ScenarioConfig::preset();
        cfg.scenario.n_o = 20;
        cfg.scenario.n_tap = 4;
        let s = build_scenario(&cfg).unwrap();
        let placed = place_nodes(&s, &mut ChaCha8Rng::seed_from_u64(seed));
        let ch: Vec<_> = (0..s.n_channels).map(|b| ChannelProcess::new(b, 1.0, 1.0)).collect();
        let topo = form_topology(&placed, &ch, &AssociationPolicy::new(1, 1));
        (placed, topo)
    }

    const LAT: LatencyBreakdown = LatencyBreakdown {
        tau_o: 0.5,
        tau_p: 0.1,
        tau_a: 0.4,
        tau_total: 1.0,
    };

    #[test]
    fn zero_traffic_draws_nothing() {
        let (placed, topo) = setup(1);
        let params = PowerParams {
            msg_rate: 0.0,
            ..PowerParams::default()
        };
        let p = mean_power(&placed, &topo, &LAT, &params).unwrap();
        assert_eq!(p.p_tx_mean, 0.0);
        assert_eq!(p.p_compute_mean, 0.0);
        assert_eq!(p.p_storage_mean, 0.0);
    }

    #[test]
    fn linear_in_message_rate() {
        let (placed, topo) = setup(2);
        let params = PowerParams::default();
        let doubled = PowerParams {
            msg_rate: 2.0 * params.msg_rate,
            ..params.clone()
        };
        let a = mean_power(&placed, &topo, &LAT, &params).unwrap();
        let b = mean_power(&placed, &topo, &LAT, &doubled).unwrap();
        assert!((b.p_tx_mean - 2.0 * a.p_tx_mean).abs() < 1e-15);
        assert!((b.p_compute_mean - 2.0 * a.p_compute_mean).abs() < 1e-15);
        assert_eq!(a.p_total_mean, a.p_tx_mean + a.p_compute_mean + a.p_storage_mean);
    }

    #[test]
    fn overload_is_reported() {
        let (placed, topo) = setup(3);
        let params = PowerParams {
            msg_rate: 1e3,
            ..PowerParams::default()
        };
        assert!(matches!(
            mean_power(&placed, &topo, &LAT, &params),
            Err(PowerError::Overload { .. })
        ));
    }

    #[test]
    fn clamps_zero_distance() {
        let params = PowerParams::default();
        assert_eq!(params.rate(0.0), params.rate(0.1));
        assert!(params.rate(0.0).is_finite());
    }

    // Switching between channels must not change what is charged.
    #[test]
    fn channel_switch_costs_nothing() {
        let (placed, topo) = setup(4);
        let mut switched = topo.clone();
        for a in switched.assignments.iter_mut().flatten() {
            a.channel = (a.channel + 1) % placed.scenario.n_channels;
        }
        let params = PowerParams::default();
        let a = mean_power(&placed, &topo, &LAT, &params).unwrap();
        let b = mean_power(&placed, &switched, &LAT, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_switching_mean, 0.0);
    }

    proptest! {
        // Moving every object toward its TAP never increases power.
        #[test]
        fn closer_is_cheaper(seed in 0u64..1000, shrink in 0.0..1.0f64) {
            let (placed, topo) = setup(seed);
            let mut closer = placed.clone();
            for (i, a) in topo.assigned() {
                let tap = placed.tap_positions[a.tap];
                let obj = placed.object_positions[i];
                closer.object_positions[i] = Point {
                    x: tap.x + (obj.x - tap.x) * shrink,
                    y: tap.y + (obj.y - tap.y) * shrink,
                };
            }
            let params = PowerParams::default();
            let before = mean_power(&placed, &topo, &LAT, &params).unwrap();
            let after = mean_power(&closer, &topo, &LAT, &params).unwrap();
            prop_assert!(after.p_total_mean <= before.p_total_mean);
            prop_assert!(after.p_tx_mean <= params.tx_power_w);
        }
    }
}
