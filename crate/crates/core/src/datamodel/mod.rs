//! Domain types for the supply network: residues, supplier provinces,
//! plants, the planning calendar and national demand targets.

mod biomass;
mod io;
mod synth;

pub use biomass::{
    builtin_biomass_table, builtin_spec, parse_biomass_csv, write_biomass_csv, BiomassId,
    BiomassSpec, TechSet, Technology,
};
pub use io::{
    load_dataset, load_dataset_from_readers, write_plants_csv, write_suppliers_csv, DatasetError,
    PLANT_COLUMNS, SUPPLIER_COLUMNS,
};
pub use synth::synth_dataset;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single validation failure, located by file, row and field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file}:{row}: `{field}`: {message}")]
    BadUnit {
        file: String,
        row: usize,
        field: String,
        message: String,
    },
    #[error("{file}:{row}: `{field}`: unknown biomass `{value}`")]
    UnknownBiomass {
        file: String,
        row: usize,
        field: String,
        value: String,
    },
    #[error("{file}:{row}: `{field}`: {message}")]
    EligibilityViolation {
        file: String,
        row: usize,
        field: String,
        message: String,
    },
    #[error("{file}:{row}: `{field}`: {message}")]
    Invalid {
        file: String,
        row: usize,
        field: String,
        message: String,
    },
    #[error("size out of range: {0}")]
    SizeOutOfRange(String),
}

/// Geographic position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

impl Location {
    pub fn new(lat: f64, lon: f64) -> Self {
        Location { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// One planning period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Month {
    pub name: String,
    pub days: u32,
    pub hours: f64,
}

/// Ordered planning periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    months: Vec<Month>,
}

const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const MONTH_DAYS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

impl TimeGrid {
    /// Non-leap civil year: 365 days, 8760 hours.
    pub fn calendar() -> Self {
        let months = MONTH_NAMES
            .iter()
            .zip(MONTH_DAYS)
            .map(|(name, days)| Month {
                name: name.to_string(),
                days,
                hours: 24.0 * f64::from(days),
            })
            .collect();
        TimeGrid { months }
    }

    /// The first `n` months of the calendar; used for truncated test horizons.
    pub fn first_months(n: usize) -> Self {
        let mut grid = Self::calendar();
        grid.months.truncate(n.clamp(1, 12));
        grid
    }

    pub fn months(&self) -> &[Month] {
        &self.months
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn hours(&self, t: usize) -> f64 {
        self.months[t].hours
    }

    pub fn days(&self, t: usize) -> f64 {
        f64::from(self.months[t].days)
    }

    pub fn total_hours(&self) -> f64 {
        self.months.iter().map(|m| m.hours).sum()
    }

    pub fn total_days(&self) -> f64 {
        self.months.iter().map(|m| f64::from(m.days)).sum()
    }

    pub fn is_full_year(&self) -> bool {
        self.months.len() == 12
            && self.total_hours() == 8760.0
            && self.months.iter().map(|m| m.days).sum::<u32>() == 365
    }
}

/// A supplying province and its monthly residue availability.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplierProfile {
    pub province_id: u32,
    pub name: String,
    pub location: Location,
    /// Tons, indexed `[biomass][month]` in the owning dataset's biomass order.
    pub availability: Vec<Vec<f64>>,
}

impl SupplierProfile {
    pub fn annual(&self, biomass: usize) -> f64 {
        self.availability[biomass].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    BiomassPower,
    BiogasPower,
    Ethanol,
}

impl PlantKind {
    pub const ALL: [PlantKind; 3] = [PlantKind::BiomassPower, PlantKind::BiogasPower, PlantKind::Ethanol];

    pub fn as_str(self) -> &'static str {
        match self {
            PlantKind::BiomassPower => "biomass-power",
            PlantKind::BiogasPower => "biogas-power",
            PlantKind::Ethanol => "ethanol",
        }
    }

    pub fn admits(self, tech: Technology) -> bool {
        match self {
            PlantKind::BiomassPower => tech.is_thermal(),
            PlantKind::BiogasPower => tech == Technology::AnaerobicDigestion,
            PlantKind::Ethanol => tech == Technology::Fermentation,
        }
    }

    pub fn is_power(self) -> bool {
        self != PlantKind::Ethanol
    }

    /// Unit of `Plant::capacity`.
    pub fn capacity_unit(self) -> &'static str {
        if self.is_power() {
            "MW"
        } else {
            "L_per_day"
        }
    }
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "biomass-power" | "biomass" => Ok(PlantKind::BiomassPower),
            "biogas-power" | "biogas" => Ok(PlantKind::BiogasPower),
            "ethanol" | "bioethanol" | "bio-ethanol" => Ok(PlantKind::Ethanol),
            _ => Err(format!("unknown plant kind `{s}`")),
        }
    }
}

/// An existing conversion facility.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub plant_id: u32,
    pub kind: PlantKind,
    pub technology: Technology,
    /// MW for power plants, liters/day for ethanol plants.
    pub capacity: f64,
    pub max_inventory: f64,
    /// THB per ton-month; `None` falls back to the configured default.
    pub holding_cost: Option<f64>,
    pub location: Location,
    pub efficiency_override: Option<f64>,
}

/// National consumption targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandTargets {
    /// MW of electricity from biomass power plants.
    pub biomass_elec_mw: f64,
    /// MW of electricity from biogas power plants.
    pub biogas_elec_mw: f64,
    /// Million liters per day of ethanol.
    pub ethanol_ml_per_day: f64,
}

impl DemandTargets {
    /// The national targets used in the reference study.
    pub const AEDP: DemandTargets = DemandTargets {
        biomass_elec_mw: 3940.0,
        biogas_elec_mw: 387.0,
        ethanol_ml_per_day: 4.79,
    };

    pub const ZERO: DemandTargets = DemandTargets {
        biomass_elec_mw: 0.0,
        biogas_elec_mw: 0.0,
        ethanol_ml_per_day: 0.0,
    };

    pub fn for_kind(&self, kind: PlantKind) -> f64 {
        match kind {
            PlantKind::BiomassPower => self.biomass_elec_mw,
            PlantKind::BiogasPower => self.biogas_elec_mw,
            PlantKind::Ethanol => self.ethanol_ml_per_day,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DemandTargets {
            biomass_elec_mw: self.biomass_elec_mw * factor,
            biogas_elec_mw: self.biogas_elec_mw * factor,
            ethanol_ml_per_day: self.ethanol_ml_per_day * factor,
        }
    }
}

impl Default for DemandTargets {
    fn default() -> Self {
        Self::AEDP
    }
}

/// A validated planning instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub biomass: Vec<BiomassSpec>,
    pub suppliers: Vec<SupplierProfile>,
    pub plants: Vec<Plant>,
    pub timegrid: TimeGrid,
    pub demand: DemandTargets,
}

impl Dataset {
    /// Builds a dataset, running every invariant check.
    pub fn new(
        biomass: Vec<BiomassSpec>,
        suppliers: Vec<SupplierProfile>,
        plants: Vec<Plant>,
        timegrid: TimeGrid,
        demand: DemandTargets,
    ) -> Result<Self, Vec<DataError>> {
        let dataset = Dataset {
            biomass,
            suppliers,
            plants,
            timegrid,
            demand,
        };
        let errors = dataset.validate();
        if errors.is_empty() {
            Ok(dataset)
        } else {
            Err(errors)
        }
    }

    pub fn biomass_index(&self, id: BiomassId) -> Option<usize> {
        self.biomass.iter().position(|b| b.id == id)
    }

    pub fn months(&self) -> usize {
        self.timegrid.len()
    }

    /// Whether plant `j` can convert dataset biomass `b`.
    pub fn is_eligible(&self, b: usize, j: usize) -> bool {
        self.biomass[b].supports(self.plants[j].technology)
    }

    /// Total available tons of biomass `b` in month `t`.
    pub fn available(&self, b: usize, t: usize) -> f64 {
        self.suppliers.iter().map(|s| s.availability[b][t]).sum()
    }

    /// Returns every invariant violation; empty means valid.
    pub fn validate(&self) -> Vec<DataError> {
        const FILE: &str = "<dataset>";
        let mut errors = Vec::new();
        let invalid = |row: usize, field: &str, message: String| DataError::Invalid {
            file: FILE.to_string(),
            row,
            field: field.to_string(),
            message,
        };

        if self.timegrid.is_empty() {
            errors.push(invalid(0, "timegrid", "time grid has no months".into()));
        }
        for (t, month) in self.timegrid.months().iter().enumerate() {
            if month.hours != 24.0 * f64::from(month.days) {
                errors.push(invalid(t + 1, "hours", format!("{}: hours != 24 x days", month.name)));
            }
        }

        for (row, spec) in self.biomass.iter().enumerate() {
            if let Err(e) = spec.validate(FILE, row + 1) {
                errors.push(e);
            }
            if self.biomass[..row].iter().any(|b| b.id == spec.id) {
                errors.push(invalid(row + 1, "biomass", format!("duplicate biomass {}", spec.id)));
            }
        }

        let n_months = self.timegrid.len();
        for (row, s) in self.suppliers.iter().enumerate() {
            let row = row + 1;
            if !s.location.is_valid() {
                errors.push(DataError::BadUnit {
                    file: FILE.into(),
                    row,
                    field: "lat/lon".into(),
                    message: format!("coordinates out of range: {:?}", s.location),
                });
            }
            if self.suppliers[..row - 1].iter().any(|o| o.province_id == s.province_id) {
                errors.push(invalid(row, "province_id", format!("duplicate supplier {}", s.province_id)));
            }
            if s.availability.len() != self.biomass.len()
                || s.availability.iter().any(|r| r.len() != n_months)
            {
                errors.push(invalid(
                    row,
                    "availability",
                    format!(
                        "availability must be {} biomass x {} months",
                        self.biomass.len(),
                        n_months
                    ),
                ));
                continue;
            }
            for (b, series) in s.availability.iter().enumerate() {
                for (t, &a) in series.iter().enumerate() {
                    if !(a.is_finite() && a >= 0.0) {
                        errors.push(DataError::BadUnit {
                            file: FILE.into(),
                            row,
                            field: "available_tons".into(),
                            message: format!(
                                "supplier {} {} month {}: availability must be >= 0, got {a}",
                                s.province_id,
                                self.biomass[b].id,
                                t + 1
                            ),
                        });
                    }
                }
            }
        }

        for (row, p) in self.plants.iter().enumerate() {
            let row = row + 1;
            if let Err(e) = validate_plant(p, FILE, row) {
                errors.push(e);
            }
            if self.plants[..row - 1].iter().any(|o| o.plant_id == p.plant_id) {
                errors.push(invalid(row, "plant_id", format!("duplicate plant {}", p.plant_id)));
            }
            if !self.biomass.iter().any(|b| b.supports(p.technology)) {
                errors.push(DataError::EligibilityViolation {
                    file: FILE.into(),
                    row,
                    field: "technology".into(),
                    message: format!("plant {} has no eligible feedstock in the dataset", p.plant_id),
                });
            }
        }

        let d = &self.demand;
        for (field, v) in [
            ("biomass_elec_mw", d.biomass_elec_mw),
            ("biogas_elec_mw", d.biogas_elec_mw),
            ("ethanol_ml_per_day", d.ethanol_ml_per_day),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                errors.push(DataError::BadUnit {
                    file: FILE.into(),
                    row: 0,
                    field: field.into(),
                    message: format!("demand must be >= 0, got {v}"),
                });
            }
        }
        for kind in PlantKind::ALL {
            if d.for_kind(kind) > 0.0 && !self.plants.iter().any(|p| p.kind == kind) {
                errors.push(invalid(
                    0,
                    "demand",
                    format!("positive {kind} demand but no {kind} plant"),
                ));
            }
        }
        errors
    }
}

/// Per-plant invariants that do not depend on the rest of the dataset.
pub(crate) fn validate_plant(p: &Plant, file: &str, row: usize) -> Result<(), DataError> {
    if !p.kind.admits(p.technology) {
        return Err(DataError::EligibilityViolation {
            file: file.into(),
            row,
            field: "technology".into(),
            message: format!("{} plant cannot use technology {}", p.kind, p.technology),
        });
    }
    let bad = |field: &str, message: String| DataError::BadUnit {
        file: file.into(),
        row,
        field: field.into(),
        message,
    };
    if !(p.capacity.is_finite() && p.capacity > 0.0) {
        return Err(bad("capacity", format!("capacity must be > 0, got {}", p.capacity)));
    }
    if !(p.max_inventory.is_finite() && p.max_inventory >= 0.0) {
        return Err(bad(
            "max_inventory_tons",
            format!("max inventory must be >= 0, got {}", p.max_inventory),
        ));
    }
    if let Some(h) = p.holding_cost {
        if !(h.is_finite() && h >= 0.0) {
            return Err(bad("holding_cost_thb_ton_month", format!("holding cost must be >= 0, got {h}")));
        }
    }
    if let Some(eta) = p.efficiency_override {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(bad("efficiency", format!("efficiency must be in (0, 1], got {eta}")));
        }
    }
    if !p.location.is_valid() {
        return Err(bad("lat/lon", format!("coordinates out of range: {:?}", p.location)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar_is_non_leap_year() {
        let grid = TimeGrid::calendar();
        assert_eq!(grid.len(), 12);
        assert_eq!(grid.total_hours(), 8760.0);
        assert_eq!(grid.total_days(), 365.0);
        assert_eq!(grid.hours(0), 744.0);
        assert_eq!(grid.hours(11), 744.0);
        assert_eq!(grid.hours(1), 672.0);
        assert!(grid.is_full_year());
        assert!(!TimeGrid::first_months(3).is_full_year());
    }

    #[test]
    fn kinds_admit_their_technologies() {
        use Technology::*;
        assert!(PlantKind::BiomassPower.admits(DirectFiring));
        assert!(PlantKind::BiomassPower.admits(Cogeneration));
        assert!(!PlantKind::BiomassPower.admits(AnaerobicDigestion));
        assert!(PlantKind::BiogasPower.admits(AnaerobicDigestion));
        assert!(!PlantKind::Ethanol.admits(Gasification));
        assert!(PlantKind::Ethanol.admits(Fermentation));
    }

    #[test]
    fn plant_kind_round_trips_through_text() {
        for kind in PlantKind::ALL {
            assert_eq!(kind.as_str().parse::<PlantKind>(), Ok(kind));
        }
    }

    #[test]
    fn dataset_rejects_demand_without_plants() {
        let biomass = vec![builtin_spec(BiomassId::RiceHusk)];
        let err = Dataset::new(
            biomass,
            vec![],
            vec![],
            TimeGrid::calendar(),
            DemandTargets {
                biomass_elec_mw: 1.0,
                ..DemandTargets::ZERO
            },
        )
        .unwrap_err();
        assert_eq!(err.len(), 1);
    }
}
