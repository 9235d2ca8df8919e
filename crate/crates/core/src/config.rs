//! Scenario config files.
//!
//! A config is a sectioned key/value document (TOML syntax) with the
//! sections `[scenario]`, `[traffic]`, `[power]` and `[experiment]`.
//! `[scenario]` and `[traffic]` are mandatory and every key in them is
//! required, except `access_capacity`, `pu_reference_distance` and
//! `pu_distance_exponent`. `[power]` and `[experiment]` may be omitted or
//! partially filled; missing keys take the defaults in
//! `presets/default.cfg`. Unknown sections and keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ValidationError};
use crate::power::PowerParams;
use crate::sim::SimParams;

const DEFAULT_PRESET: &str = include_str!("../presets/default.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_o: i64,
    pub n_tap: i64,
    pub n_channels: i64,
    pub n_users: i64,
    pub area_side: f64,
    pub msg_size: f64,
    pub wired_every: i64,
    pub wired_availability: f64,
    pub wireless_availability: f64,
    pub compute_capacity: f64,
    pub storage_capacity: f64,
    #[serde(default)]
    pub incentive_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub mu_s: f64,
    pub lambda_p: f64,
    pub mu_p: f64,
    pub p_share: f64,
    pub tau_p_per_unit: f64,
    pub tau_a_base: f64,
    pub tau_d2d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_capacity: Option<f64>,
    pub slot_duration: f64,
    #[serde(default = "one")]
    pub pu_reference_distance: f64,
    #[serde(default)]
    pub pu_distance_exponent: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub traffic: TrafficSection,
    #[serde(default)]
    pub power: PowerParams,
    #[serde(default)]
    pub experiment: SimParams,
}

impl ScenarioConfig {
    /// Parses a config document. Errors carry the offending line and key.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The bundled default scenario.
    pub fn preset() -> Self {
        Self::parse(DEFAULT_PRESET).expect("bundled preset parses")
    }

    /// Text of the bundled preset, comments included.
    pub fn preset_text() -> &'static str {
        DEFAULT_PRESET
    }

    /// Canonical serialization, suitable for writing back to disk.
    pub fn to_cfg_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the sections that do not become part of a `Scenario`.
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.power.validate()?;
        self.experiment.validate()
    }
}
