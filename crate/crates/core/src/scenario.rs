//! Static world description: objects, terminal access points (TAPs),
//! channels and traffic parameters, plus random placement on a square.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::ValidationError;

/// How a TAP reaches the Internet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backhaul {
    Wired,
    Wireless,
}

/// Capabilities of a user terminal acting as an access point.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    pub backhaul: Backhaul,
    /// Work units per unit time the TAP can spend on pre-processing.
    pub compute_capacity: f64,
    /// Payload units the TAP can hold.
    pub storage_capacity: f64,
    /// Probability that the terminal is willing and able to serve in a slot.
    pub availability: f64,
    /// Tie-breaker weight used during association.
    pub incentive_weight: f64,
}

/// Secondary/primary traffic rates and the delay constants that make up
/// end-to-end latency.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficParams {
    /// SU service rate (messages completed per unit time).
    pub mu_s: f64,
    /// PU arrival rate per channel.
    pub lambda_p: f64,
    /// PU departure rate per channel.
    pub mu_p: f64,
    /// Probability that an end-user request is served by a neighbour over D2D.
    pub p_share: f64,
    pub tau_p_per_unit: f64,
    pub tau_a_base: f64,
    pub tau_d2d: f64,
    /// End-users a TAP serves without slowdown; `None` means unlimited.
    pub access_capacity: Option<f64>,
    /// Duration of one transmission attempt on an idle unit-bandwidth channel.
    pub slot_duration: f64,
    /// Link length at which the PU pressure multiplier equals 1.
    pub pu_reference_distance: f64,
    /// Exponent of the distance dependence of PU pressure; 0 is homogeneous.
    pub pu_distance_exponent: f64,
}

impl TrafficParams {
    /// Mean SU message duration, `1 / mu_s`.
    pub fn msg_duration(&self) -> f64 {
        1.0 / self.mu_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_o: usize,
    pub n_tap: usize,
    pub n_channels: usize,
    pub n_users: usize,
    pub area_side: f64,
    pub msg_size: f64,
    pub tap_profiles: Vec<TapProfile>,
    pub traffic: TrafficParams,
}

impl Scenario {
    /// Checks every invariant, reporting the first violated field.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.n_tap < 1 {
            return Err(ValidationError::new("n_tap", "must be at least 1"));
        }
        if self.n_channels < 1 {
            return Err(ValidationError::new("n_channels", "must be at least 1"));
        }
        check_positive("area_side", self.area_side)?;
        check_non_negative("msg_size", self.msg_size)?;
        if self.tap_profiles.len() != self.n_tap {
            return Err(ValidationError::new(
                "tap_profiles",
                format!("expected {} profiles, got {}", self.n_tap, self.tap_profiles.len()),
            ));
        }
        for tap in &self.tap_profiles {
            check_probability("availability", tap.availability)?;
            check_positive("compute_capacity", tap.compute_capacity)?;
            check_non_negative("storage_capacity", tap.storage_capacity)?;
            check_non_negative("incentive_weight", tap.incentive_weight)?;
        }
        let t = &self.traffic;
        check_positive("mu_s", t.mu_s)?;
        check_non_negative("lambda_p", t.lambda_p)?;
        check_positive("mu_p", t.mu_p)?;
        check_probability("p_share", t.p_share)?;
        check_non_negative("tau_p_per_unit", t.tau_p_per_unit)?;
        check_non_negative("tau_a_base", t.tau_a_base)?;
        check_non_negative("tau_d2d", t.tau_d2d)?;
        if t.tau_d2d > t.tau_a_base {
            return Err(ValidationError::new("tau_d2d", "must not exceed tau_a_base"));
        }
        if let Some(cap) = t.access_capacity {
            check_positive("access_capacity", cap)?;
        }
        check_positive("slot_duration", t.slot_duration)?;
        check_positive("pu_reference_distance", t.pu_reference_distance)?;
        check_non_negative("pu_distance_exponent", t.pu_distance_exponent)?;
        Ok(())
    }
}

fn check_positive(field: &'static str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be positive, got {v}")))
    }
}

fn check_non_negative(field: &'static str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be non-negative, got {v}")))
    }
}

fn check_probability(field: &'static str, v: f64) -> Result<(), ValidationError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must lie in [0, 1], got {v}")))
    }
}

fn count(field: &'static str, v: i64) -> Result<usize, ValidationError> {
    usize::try_from(v).map_err(|_| ValidationError::new(field, format!("must be non-negative, got {v}")))
}

/// Builds and validates a scenario from a parsed config.
///
/// TAP `j` gets a wired backhaul when `j % wired_every == 0` (never when
/// `wired_every` is 0); the backhaul decides its availability.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario, ValidationError> {
    let s = &config.scenario;
    let n_o = count("n_o", s.n_o)?;
    let n_tap = count("n_tap", s.n_tap)?;
    if n_tap < 1 {
        return Err(ValidationError::new("n_tap", "must be at least 1"));
    }
    let n_channels = count("n_channels", s.n_channels)?;
    let n_users = count("n_users", s.n_users)?;
    let wired_every = count("wired_every", s.wired_every)?;

    let tap_profiles = (0..n_tap)
        .map(|j| {
            let wired = wired_every > 0 && j % wired_every == 0;
            TapProfile {
                backhaul: if wired { Backhaul::Wired } else { Backhaul::Wireless },
                compute_capacity: s.compute_capacity,
                storage_capacity: s.storage_capacity,
                availability: if wired {
                    s.wired_availability
                } else {
                    s.wireless_availability
                },
                incentive_weight: s.incentive_weight,
            }
        })
        .collect();

    let t = &config.traffic;
    let scenario = Scenario {
        n_o,
        n_tap,
        n_channels,
        n_users,
        area_side: s.area_side,
        msg_size: s.msg_size,
        tap_profiles,
        traffic: TrafficParams {
            mu_s: t.mu_s,
            lambda_p: t.lambda_p,
            mu_p: t.mu_p,
            p_share: t.p_share,
            tau_p_per_unit: t.tau_p_per_unit,
            tau_a_base: t.tau_a_base,
            tau_d2d: t.tau_d2d,
            access_capacity: t.access_capacity,
            slot_duration: t.slot_duration,
            pu_reference_distance: t.pu_reference_distance,
            pu_distance_exponent: t.pu_distance_exponent,
        },
    };
    scenario.validate()?;
    Ok(scenario)
}

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedScenario {
    pub scenario: Scenario,
    pub object_positions: Vec<Point>,
    pub tap_positions: Vec<Point>,
}

impl PlacedScenario {
    pub fn distance(&self, object: usize, tap: usize) -> f64 {
        self.object_positions[object].distance(&self.tap_positions[tap])
    }

    /// Distance from `object` to its closest TAP.
    pub fn nearest_tap_distance(&self, object: usize) -> f64 {
        (0..self.tap_positions.len())
            .map(|j| self.distance(object, j))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Draws object positions, then TAP positions, i.i.d. uniform over the
/// square `[0, area_side]²`.
///
/// Objects are drawn first so that runs differing only in `n_tap` share
/// object positions for a given seed.
pub fn place_nodes<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> PlacedScenario {
    let side = scenario.area_side;
    let draw = |rng: &mut R| Point {
        x: rng.random::<f64>() * side,
        y: rng.random::<f64>() * side,
    };
    let object_positions = (0..scenario.n_o).map(|_| draw(rng)).collect();
    let tap_positions = (0..scenario.n_tap).map(|_| draw(rng)).collect();
    PlacedScenario {
        scenario: scenario.clone(),
        object_positions,
        tap_positions,
    }
}
