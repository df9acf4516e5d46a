//! Scenario configuration: the TOML schema, defaults, and validation.
//!
//! Unknown keys are hard errors so typos in physics parameters never pass
//! silently. Every field has a default matching the reference parameter set
//! (28 GHz carrier, 200 MHz bandwidth, 100 UEs, 10 selectable, -6 dBW,
//! 24 dBi, 290 K, 5 dB noise figure, Earth radius 6371 km), so a config file
//! only needs to state what it changes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelProfile, ElevationTable, LinkBudgetParams};
use crate::scheduler::SelectionMethod;
use crate::tdd::{DuplexPolicy, ScheduleError, SlotGrid, SlotPattern};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
}

fn invalid(field: &'static str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.to_string(),
    }
}

/// Which UE population defines the delay extremes fed to slot allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayScope {
    /// tau extremes over the scheduled subset only.
    Selected,
    /// tau extremes over the whole drawn population.
    Cell,
}

impl std::fmt::Display for DelayScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DelayScope::Selected => "selected",
            DelayScope::Cell => "cell",
        })
    }
}

impl std::str::FromStr for DelayScope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "selected" => Ok(DelayScope::Selected),
            "cell" => Ok(DelayScope::Cell),
            other => Err(format!(
                "unknown delay scope '{other}' (expected selected|cell)"
            )),
        }
    }
}

/// Channel profile selection: a named built-in or inline tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    /// No atmospheric loss, no scintillation, no shadowing.
    Zero,
    /// Built-in Ka-band urban tables.
    KaUrban,
    /// Inline elevation-bucketed tables.
    Custom {
        elevation_deg: Vec<f64>,
        atmospheric_db: Vec<f64>,
        scintillation_db: Vec<f64>,
        shadowing_sigma_db: Vec<f64>,
    },
}

impl ProfileConfig {
    pub fn build(&self) -> Result<ChannelProfile<f64>, ChannelError> {
        match self {
            ProfileConfig::Zero => Ok(ChannelProfile::zero_loss()),
            ProfileConfig::KaUrban => Ok(ChannelProfile::ka_urban()),
            ProfileConfig::Custom {
                elevation_deg,
                atmospheric_db,
                scintillation_db,
                shadowing_sigma_db,
            } => Ok(ChannelProfile {
                atmospheric: ElevationTable::new(elevation_deg.clone(), atmospheric_db.clone())?,
                scintillation: ElevationTable::new(
                    elevation_deg.clone(),
                    scintillation_db.clone(),
                )?,
                shadowing_sigma: ElevationTable::new(
                    elevation_deg.clone(),
                    shadowing_sigma_db.clone(),
                )?,
            }),
        }
    }
}

/// All physical, protocol, and sweep parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub altitude_km: f64,
    pub earth_radius_km: f64,
    pub alpha_min_deg: f64,
    pub alpha_max_deg: f64,
    pub n_ue: usize,
    pub n_s: usize,
    pub policy: DuplexPolicy,
    pub scheduler: SelectionMethod,
    pub delay_scope: DelayScope,
    pub runs: usize,
    pub seed: u64,
    pub link: LinkBudgetParams<f64>,
    pub grid: SlotGrid<f64>,
    pub pattern: SlotPattern,
    pub profile: ProfileConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            altitude_km: 600.0,
            earth_radius_km: 6371.0,
            alpha_min_deg: 50.0,
            alpha_max_deg: 90.0,
            n_ue: 100,
            n_s: 10,
            policy: DuplexPolicy::Ta,
            scheduler: SelectionMethod::Mg,
            delay_scope: DelayScope::Selected,
            runs: 200,
            seed: 1,
            link: LinkBudgetParams {
                tx_power_dbw: -6.0,
                total_antenna_gain_dbi: 24.0,
                carrier_freq_ghz: 28.0,
                bandwidth_mhz: 200.0,
                noise_temperature_k: 290.0,
                noise_figure_db: 5.0,
                calibration_gain_db: 0.0,
            },
            grid: SlotGrid {
                slot_duration_ms: 0.125,
                horizon_slots: 4096,
                ul_slots_per_tx: 1,
            },
            pattern: SlotPattern { dl_slots_per_tx: 1 },
            profile: ProfileConfig::KaUrban,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let config: ScenarioConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !crate::float::positive(self.altitude_km) {
            return Err(invalid("altitude_km", "must be positive"));
        }
        if !crate::float::positive(self.earth_radius_km) {
            return Err(invalid("earth_radius_km", "must be positive"));
        }
        if !crate::float::positive(self.alpha_min_deg) {
            return Err(invalid("alpha_min_deg", "must be greater than 0"));
        }
        if self.alpha_min_deg > self.alpha_max_deg {
            return Err(invalid("alpha_min_deg", "must not exceed alpha_max_deg"));
        }
        if self.alpha_max_deg > 90.0 {
            return Err(invalid("alpha_max_deg", "must not exceed 90"));
        }
        if self.n_ue == 0 {
            return Err(invalid("n_ue", "must be at least 1"));
        }
        if self.n_s == 0 || self.n_s > self.n_ue {
            return Err(invalid("n_s", format!("must be in 1..={}", self.n_ue)));
        }
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        self.link.validate().map_err(|e| invalid("link", e))?;
        self.grid.validate().map_err(|e| invalid("grid", e))?;
        SlotPattern::new(self.pattern.dl_slots_per_tx)
            .map_err(|e: ScheduleError| invalid("pattern.dl_slots_per_tx", e))?;
        self.profile.build().map_err(|e| invalid("profile", e))?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form; identifies a scenario in
    /// outputs.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
