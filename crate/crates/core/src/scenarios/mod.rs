//! Scenario models over a dataset: potential, minimum cost, full
//! operation, and capacity expansion.

mod build;
mod config;
mod report;
mod run;

use thiserror::Error;

pub use build::{
    nameplate, BuiltModel, DemandRow, ExtraSupply, OutputVar, PlantSlot, Planner, Shipment, StockVar,
    NEW_PLANT_ID_BASE,
};
pub use config::{
    CandidateSite, DemandMode, DemandSource, ExpansionConfig, LcoeTable, ScenarioConfig, TargetSource,
};
pub use report::{
    cost_increase_ratio, evaluate, ByKind, CostBreakdown, DemandLevels, EnergySummary, ExpansionSummary,
    ExtraSupplyEntry, InventoryMetrics, MonthlyTables, NewPlantEntry, ScenarioReport, OPERATING_THRESHOLD,
};
pub use run::{PassInfo, ScenarioKind, ScenarioOutcome};

use crate::conversion::ConversionError;
use crate::datamodel::Location;
use crate::lp::{LpError, SolveStatus};
use crate::transport::TransportError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("plant {plant} has no eligible feedstock in the dataset")]
    NoEligibleFeedstock { plant: u32 },
    #[error("solution is not optimal ({0:?})")]
    NonOptimalSolution(SolveStatus),
    #[error("center of gravity needs at least one positive weight")]
    AllZeroWeights,
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Weighted mean of `(lat, lon, weight)` points.
pub fn center_of_gravity(points: &[(f64, f64, f64)]) -> Result<Location, ScenarioError> {
    if points.iter().any(|p| !(p.2 >= 0.0)) {
        return Err(ScenarioError::InvalidConfig("center-of-gravity weights must be >= 0".into()));
    }
    let total: f64 = points.iter().map(|p| p.2).sum();
    if !(total > 0.0) {
        return Err(ScenarioError::AllZeroWeights);
    }
    let lat = points.iter().map(|p| p.0 * p.2).sum::<f64>() / total;
    let lon = points.iter().map(|p| p.1 * p.2).sum::<f64>() / total;
    Ok(Location::new(lat, lon))
}

/// Tons of sugarcane that yield `molasses_tons` of molasses.
pub fn sugarcane_equivalent(molasses_tons: f64, molasses_per_sugarcane: f64) -> f64 {
    molasses_tons / molasses_per_sugarcane
}
