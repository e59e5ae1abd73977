use serde::{Deserialize, Serialize};

use crate::conversion::EfficiencySet;
use crate::datamodel::{Location, Plant, PlantKind, Technology};

/// How production is tied to demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandMode {
    Equality,
    AtLeast,
}

/// Where cost scenarios take their demand levels from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandSource {
    /// The dataset's targets as given.
    Dataset,
    /// The optimum of the potential scenario run on the same inputs.
    Potential,
}

/// Operating cost rates. Power routes in USD/kWh, ethanol in THB/L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LcoeTable {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    pub ethanol_thb_per_liter: f64,
}

impl Default for LcoeTable {
    /// Mid-points of the published investment ranges; digestion reuses gasification's rate.
    fn default() -> Self {
        LcoeTable {
            q1: 0.085,
            q2: 0.195,
            q3: 0.18,
            q4: 0.195,
            ethanol_thb_per_liter: 3.0,
        }
    }
}

/// Scenario parameters shared by every builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub efficiency: EfficiencySet,
    pub lcoe: LcoeTable,
    /// THB per USD.
    pub fx_rate: f64,
    /// Fraction of nameplate output available after maintenance.
    pub availability_factor: f64,
    /// Minimum annual output of every plant as a fraction of its capacity (full-operation case).
    pub epsilon_operation: f64,
    pub demand_mode: DemandMode,
    pub demand_source: DemandSource,
    /// Opening stock of every (biomass, plant) pair, tons.
    pub initial_inventory: f64,
    /// Tons of molasses per ton of sugarcane crushed.
    pub molasses_per_sugarcane: f64,
    /// THB per ton-month, used when a plant has no holding cost of its own.
    pub default_holding_cost: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            efficiency: EfficiencySet::default(),
            lcoe: LcoeTable::default(),
            fx_rate: 33.0,
            availability_factor: 0.89,
            epsilon_operation: 0.05,
            demand_mode: DemandMode::Equality,
            demand_source: DemandSource::Potential,
            initial_inventory: 0.0,
            molasses_per_sugarcane: 0.046,
            default_holding_cost: 50.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.efficiency.validate().map_err(|e| e.to_string())?;
        if !(self.availability_factor > 0.0 && self.availability_factor <= 1.0) {
            return Err(format!("availability_factor must be in (0, 1], got {}", self.availability_factor));
        }
        if !(0.0..=1.0).contains(&self.epsilon_operation) {
            return Err(format!("epsilon_operation must be in [0, 1], got {}", self.epsilon_operation));
        }
        if !(self.fx_rate > 0.0) {
            return Err(format!("fx_rate must be > 0, got {}", self.fx_rate));
        }
        if !(self.initial_inventory >= 0.0) {
            return Err(format!("initial_inventory must be >= 0, got {}", self.initial_inventory));
        }
        if !(self.molasses_per_sugarcane > 0.0) {
            return Err(format!("molasses_per_sugarcane must be > 0, got {}", self.molasses_per_sugarcane));
        }
        let l = &self.lcoe;
        if [l.q1, l.q2, l.q3, l.q4, l.ethanol_thb_per_liter, self.default_holding_cost]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            return Err("cost rates must be >= 0".into());
        }
        Ok(())
    }

    /// Efficiency of a plant: its override, or the technology default.
    pub fn efficiency_for(&self, plant: &Plant) -> f64 {
        plant
            .efficiency_override
            .or_else(|| self.efficiency.get(plant.technology))
            .unwrap_or(1.0)
    }

    /// Operating cost per unit of output: THB/MWh for power, THB/L for ethanol.
    pub fn operating_cost(&self, technology: Technology) -> f64 {
        let usd_per_kwh = match technology {
            Technology::DirectFiring => self.lcoe.q1,
            Technology::Gasification => self.lcoe.q2,
            Technology::Cogeneration => self.lcoe.q3,
            Technology::AnaerobicDigestion => self.lcoe.q4,
            Technology::Fermentation => return self.lcoe.ethanol_thb_per_liter,
        };
        usd_per_kwh * self.fx_rate * 1000.0
    }

    pub fn holding_cost_for(&self, plant: &Plant) -> f64 {
        plant.holding_cost.unwrap_or(self.default_holding_cost)
    }
}

/// Where expansion scenarios take their targets from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSource {
    Dataset,
    Potential,
}

/// A pre-chosen location for a new plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSite {
    pub kind: PlantKind,
    pub location: Location,
}

impl CandidateSite {
    /// New biomass plants gasify; new biogas plants digest.
    pub fn technology(&self) -> Option<Technology> {
        match self.kind {
            PlantKind::BiomassPower => Some(Technology::Gasification),
            PlantKind::BiogasPower => Some(Technology::AnaerobicDigestion),
            PlantKind::Ethanol => None,
        }
    }
}

/// Settings for the capacity expansion case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    pub targets: TargetSource,
    /// Upper bound on each new plant's capacity, MW; `None` is unbounded.
    pub max_new_capacity_mw: Option<f64>,
    /// Storage allowance of a new biomass plant per MW built, tons.
    pub biomass_inventory_tons_per_mw: f64,
    /// Storage allowance of a new biogas plant per MW built, tons.
    pub biogas_inventory_tons_per_mw: f64,
    /// Explicit sites; empty means site by centre of gravity.
    pub sites: Vec<CandidateSite>,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            targets: TargetSource::Dataset,
            max_new_capacity_mw: None,
            biomass_inventory_tons_per_mw: 2_000.0,
            biogas_inventory_tons_per_mw: 200_000.0,
            sites: Vec::new(),
        }
    }
}

impl ExpansionConfig {
    pub fn inventory_per_mw(&self, kind: PlantKind) -> f64 {
        match kind {
            PlantKind::BiogasPower => self.biogas_inventory_tons_per_mw,
            _ => self.biomass_inventory_tons_per_mw,
        }
    }
}
