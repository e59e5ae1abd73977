//! Run configuration, read from a TOML file.
//!
//! ```toml
//! fx_rate = 33.0
//! availability_factor = 0.89
//! epsilon_operation = 0.05
//! demand_mode = "equality"        # or "at-least"
//! demand_source = "potential"     # or "dataset"
//! initial_inventory = 0.0
//! molasses_per_sugarcane = 0.046
//! default_holding_cost = 50.0
//!
//! [efficiency]
//! q1 = 0.25
//! q2 = 0.30
//! q3 = 0.35
//! q4 = 0.35
//!
//! [lcoe]                          # USD/kWh; ethanol in THB/L
//! q1 = 0.085
//! q2 = 0.195
//! q3 = 0.18
//! q4 = 0.195
//! ethanol_thb_per_liter = 3.0
//!
//! [demand]
//! biomass_elec_mw = 3940.0
//! biogas_elec_mw = 387.0
//! ethanol_ml_per_day = 4.79
//!
//! [transport]
//! winding_factor = 1.3
//! fallback = "haversine"          # or "error"
//!
//! [expansion]
//! targets = "dataset"             # or "potential"
//!
//! [solver]
//! max_iterations = 200000
//! ```
//!
//! Every key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::DemandTargets;
use crate::lp::Tolerances;
use crate::scenarios::{ExpansionConfig, ScenarioConfig};
use crate::transport::TransportConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub demand: DemandTargets,
    pub transport: TransportConfig,
    pub expansion: ExpansionConfig,
    pub solver: Tolerances,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scenario: ScenarioConfig::default(),
            demand: DemandTargets::AEDP,
            transport: TransportConfig::default(),
            expansion: ExpansionConfig::default(),
            solver: Tolerances::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        // Sections reject unknown keys themselves; the flattened top level cannot.
        let known: toml::Table = toml::Table::try_from(Config::default()).expect("config serializes to TOML");
        if let Some(key) = table.keys().find(|k| !known.contains_key(*k)) {
            return Err(ConfigError::Parse(format!("unknown key `{key}`")));
        }
        let config: Config = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate().map_err(ConfigError::Invalid)?;
        if !(self.transport.winding_factor > 0.0) {
            return Err(ConfigError::Invalid("transport.winding_factor must be > 0".into()));
        }
        if !(self.transport.flatbed.is_valid() && self.transport.tanker.is_valid()) {
            return Err(ConfigError::Invalid("truck payload and cost must be > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::DemandMode;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn reads_flat_and_sectioned_keys() {
        let c = Config::from_toml(
            "fx_rate = 35\ndemand_mode = \"at-least\"\n[efficiency]\nq2 = 0.4\n[demand]\nbiogas_elec_mw = 0\n",
        )
        .unwrap();
        assert_eq!(c.scenario.fx_rate, 35.0);
        assert_eq!(c.scenario.demand_mode, DemandMode::AtLeast);
        assert_eq!(c.scenario.efficiency.q2, 0.4);
        assert_eq!(c.scenario.efficiency.q1, 0.25);
        assert_eq!(c.demand.biogas_elec_mw, 0.0);
        assert_eq!(c.demand.biomass_elec_mw, 3940.0);
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(Config::from_toml("availability_factor = 1.5").is_err());
        let err = Config::from_toml("fx_rate = 35\nwinding = 1.2\n").unwrap_err();
        assert!(err.to_string().contains("winding"), "{err}");
        assert!(Config::from_toml("[efficiency]\nq1 = 0").is_err());
        assert!(Config::from_toml("[demand]\nfoo = 1").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = Config::default();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }
}
