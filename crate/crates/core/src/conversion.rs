//! Feedstock-to-energy yields for the five conversion routes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{BiomassId, BiomassSpec, Technology};

/// MJ per MWh.
pub const MJ_PER_MWH: f64 = 3600.0;

/// Energy content of one liter of ethanol, MWh.
pub const ETHANOL_MWH_PER_LITER: f64 = 5.9313e-3;

/// Ratio of tabulated biogas heat equivalent (MJ/ton) to methane content (m³/kg).
pub const BIOGAS_HEAT_PER_METHANE: f64 = 478.05;

/// Methane properties used for biogas accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethaneConstants {
    /// kg/m³
    pub density: f64,
    /// kJ/(kg·K)
    pub cv: f64,
    /// kJ/(kg·K)
    pub cp: f64,
}

pub const METHANE: MethaneConstants = MethaneConstants {
    density: 0.657,
    cv: 1.709,
    cp: 2.232,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConversionError {
    #[error("{biomass} cannot be converted by technology {technology}")]
    IneligibleBiomass { biomass: BiomassId, technology: u8 },
    #[error("invalid efficiency {0}; must be in (0, 1]")]
    BadEfficiency(f64),
}

/// Electrical efficiency per technology 1..=4. Fermentation has none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficiencySet {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
}

impl Default for EfficiencySet {
    fn default() -> Self {
        EfficiencySet {
            q1: 0.25,
            q2: 0.30,
            q3: 0.35,
            q4: 0.35,
        }
    }
}

impl EfficiencySet {
    pub fn get(&self, tech: Technology) -> Option<f64> {
        match tech {
            Technology::DirectFiring => Some(self.q1),
            Technology::Gasification => Some(self.q2),
            Technology::Cogeneration => Some(self.q3),
            Technology::AnaerobicDigestion => Some(self.q4),
            Technology::Fermentation => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConversionError> {
        for eta in [self.q1, self.q2, self.q3, self.q4] {
            check_eta(eta)?;
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<(), ConversionError> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(ConversionError::BadEfficiency(eta))
    }
}

fn ineligible(biomass: &BiomassSpec, technology: Technology) -> ConversionError {
    ConversionError::IneligibleBiomass {
        biomass: biomass.id,
        technology: technology.code(),
    }
}

/// Heat released by burning `tons`, MJ.
pub fn heat_output(biomass: &BiomassSpec, tons: f64) -> Result<f64, ConversionError> {
    let heat = biomass
        .heat_capacity
        .ok_or_else(|| ineligible(biomass, Technology::DirectFiring))?;
    Ok(heat * tons)
}

/// Heat recoverable from digesting `tons`, MJ.
pub fn biogas_output(biomass: &BiomassSpec, tons: f64) -> Result<f64, ConversionError> {
    match biomass.biogas_heat_equiv {
        Some(g) if biomass.supports(Technology::AnaerobicDigestion) => Ok(g * tons),
        _ => Err(ineligible(biomass, Technology::AnaerobicDigestion)),
    }
}

/// Ethanol fermented from `tons`, liters.
pub fn ethanol_output(biomass: &BiomassSpec, tons: f64) -> Result<f64, ConversionError> {
    match biomass.ethanol_coeff {
        Some(w) if biomass.supports(Technology::Fermentation) => Ok(tons * 1000.0 / w),
        _ => Err(ineligible(biomass, Technology::Fermentation)),
    }
}

/// Electricity from `heat_mj` at efficiency `eta`, MWh.
pub fn electricity_mwh(heat_mj: f64, eta: f64) -> f64 {
    heat_mj * eta / MJ_PER_MWH
}

/// What a quantity of output measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    /// MWh of electricity.
    Electricity,
    /// Liters of ethanol.
    Ethanol,
}

/// Converts an output amount to MWh.
pub fn mwh_equivalent(kind: EnergyKind, amount: f64) -> f64 {
    match kind {
        EnergyKind::Electricity => amount,
        EnergyKind::Ethanol => amount * ETHANOL_MWH_PER_LITER,
    }
}

/// Output per ton of feedstock: MWh/ton for power routes, liters/ton for fermentation.
///
/// `eta` is ignored for fermentation.
pub fn yield_per_ton(biomass: &BiomassSpec, technology: Technology, eta: f64) -> Result<f64, ConversionError> {
    if !biomass.supports(technology) {
        return Err(ineligible(biomass, technology));
    }
    match technology {
        Technology::Fermentation => ethanol_output(biomass, 1.0),
        Technology::AnaerobicDigestion => {
            check_eta(eta)?;
            Ok(electricity_mwh(biogas_output(biomass, 1.0)?, eta))
        }
        _ => {
            check_eta(eta)?;
            Ok(electricity_mwh(heat_output(biomass, 1.0)?, eta))
        }
    }
}
