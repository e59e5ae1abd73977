//! Post-solve metrics and the per-month flow tables.

use serde::Serialize;

use crate::config::Config;
use crate::conversion::ETHANOL_MWH_PER_LITER;
use crate::datamodel::{Dataset, Location, PlantKind};
use crate::lp::{Solution, SolveStatus};

use super::build::{nameplate, BuiltModel};
use super::ScenarioError;

/// Output above which a plant counts as operating.
pub const OPERATING_THRESHOLD: f64 = 1e-6;
/// New plants smaller than this (MW) are treated as not built.
pub const BUILT_THRESHOLD_MW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub biomass: f64,
    pub transport: f64,
    pub operating: f64,
    pub holding: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.biomass + self.transport + self.operating + self.holding
    }
}

/// A metric split by plant kind; `None` where a kind has no plants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ByKind {
    pub overall: Option<f64>,
    pub biomass_power: Option<f64>,
    pub biogas_power: Option<f64>,
    pub ethanol: Option<f64>,
}

impl ByKind {
    pub fn get(&self, kind: PlantKind) -> Option<f64> {
        match kind {
            PlantKind::BiomassPower => self.biomass_power,
            PlantKind::BiogasPower => self.biogas_power,
            PlantKind::Ethanol => self.ethanol,
        }
    }

    fn set(&mut self, kind: PlantKind, value: Option<f64>) {
        match kind {
            PlantKind::BiomassPower => self.biomass_power = value,
            PlantKind::BiogasPower => self.biogas_power = value,
            PlantKind::Ethanol => self.ethanol = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergySummary {
    pub biomass_power_mwh: f64,
    pub biogas_power_mwh: f64,
    pub ethanol_liters: f64,
    pub ethanol_mwh: f64,
    pub total_twh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct InventoryMetrics {
    /// Mean of monthly stock over storage limit, over plants with a limit.
    pub utilization: Option<f64>,
    /// Population variance of each plant's monthly total stock (tons²).
    pub variance: ByKind,
    pub peak_tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtraSupplyEntry {
    pub province_id: u32,
    pub biomass: String,
    pub tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewPlantEntry {
    pub plant_id: u32,
    pub kind: PlantKind,
    pub location: Location,
    pub capacity_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionSummary {
    pub extra_supply_tons: f64,
    pub extra_supply: Vec<ExtraSupplyEntry>,
    pub molasses_extra_tons: f64,
    pub sugarcane_equivalent_tons: f64,
    pub new_plants: Vec<NewPlantEntry>,
    pub new_capacity_mw: f64,
}

/// Demand levels the run met or chose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandLevels {
    pub biomass_elec_mw: f64,
    pub biogas_elec_mw: f64,
    pub ethanol_ml_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyTables {
    /// (biomass key, month, shipped tons, available tons)
    pub biomass_usage: Vec<(String, usize, f64, f64)>,
    /// (plant id, kind, month, output)
    pub production: Vec<(u32, PlantKind, usize, f64)>,
    /// (plant id, month, tons)
    pub inventory: Vec<(u32, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub total_cost: f64,
    pub cost: CostBreakdown,
    pub energy: EnergySummary,
    pub capacity_factor: ByKind,
    pub operation_rate: ByKind,
    pub inventory: InventoryMetrics,
    pub demand: DemandLevels,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionSummary>,
    /// Plants whose holding cost came from the configured default.
    pub holding_cost_defaulted: Vec<u32>,
    #[serde(skip)]
    pub monthly: MonthlyTables,
}

/// Relative change from `base` to `new`.
pub fn cost_increase_ratio(base: f64, new: f64) -> f64 {
    new / base - 1.0
}

fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Computes the report of an optimal solution of `built`.
pub fn evaluate(
    built: &BuiltModel,
    solution: &Solution,
    dataset: &Dataset,
    config: &Config,
) -> Result<ScenarioReport, ScenarioError> {
    if solution.status != SolveStatus::Optimal {
        return Err(ScenarioError::NonOptimalSolution(solution.status));
    }
    let x = &solution.primal;
    let grid = &dataset.timegrid;
    let months = grid.len();
    let n_plants = built.plants.len();

    let mut cost = CostBreakdown::default();
    for s in &built.x {
        cost.biomass += s.biomass_cost * x[s.var.0];
        cost.transport += s.transport_cost * x[s.var.0];
    }
    for o in &built.e {
        cost.operating += built.plants[o.plant].operating_cost * x[o.var.0];
    }
    for s in &built.v {
        cost.holding += built.plants[s.plant].holding_cost * x[s.var.0];
    }

    let mut output = vec![vec![0.0; months]; n_plants];
    for o in &built.e {
        output[o.plant][o.month] += x[o.var.0];
    }
    let mut stock = vec![vec![0.0; months]; n_plants];
    for s in &built.v {
        stock[s.plant][s.month] += x[s.var.0];
    }

    // Size of each plant: fixed, or the solved new capacity.
    let capacity: Vec<f64> = built
        .plants
        .iter()
        .map(|p| p.new_capacity.map_or(p.plant.capacity, |v| x[v.0]))
        .collect();
    let active: Vec<bool> = built
        .plants
        .iter()
        .zip(&capacity)
        .map(|(p, &c)| !p.is_new() || c > BUILT_THRESHOLD_MW)
        .collect();

    let mut energy = EnergySummary::default();
    for (j, p) in built.plants.iter().enumerate() {
        let total: f64 = output[j].iter().sum();
        match p.plant.kind {
            PlantKind::BiomassPower => energy.biomass_power_mwh += total,
            PlantKind::BiogasPower => energy.biogas_power_mwh += total,
            PlantKind::Ethanol => energy.ethanol_liters += total,
        }
    }
    energy.ethanol_mwh = energy.ethanol_liters * ETHANOL_MWH_PER_LITER;
    energy.total_twh = (energy.biomass_power_mwh + energy.biogas_power_mwh + energy.ethanol_mwh) / 1e6;

    let to_mwh = |kind: PlantKind, v: f64| if kind.is_power() { v } else { v * ETHANOL_MWH_PER_LITER };
    let mut capacity_factor = ByKind::default();
    let mut operation_rate = ByKind::default();
    let mut variance = ByKind::default();
    let (mut all_out, mut all_cap) = (0.0, 0.0);
    let mut all_operating = 0usize;
    let mut all_count = 0usize;
    let mut all_var = Vec::new();
    for kind in PlantKind::ALL {
        let (mut out, mut cap) = (0.0, 0.0);
        let mut operating = 0usize;
        let mut vars = Vec::new();
        for (j, p) in built.plants.iter().enumerate() {
            if p.plant.kind != kind || !active[j] {
                continue;
            }
            let total: f64 = output[j].iter().sum();
            let mut sized = p.plant.clone();
            sized.capacity = capacity[j];
            let nameplate_total: f64 = (0..months).map(|t| nameplate(&sized, dataset, t)).sum();
            out += total;
            cap += nameplate_total;
            if total > OPERATING_THRESHOLD {
                operating += 1;
            }
            vars.push(population_variance(&stock[j]));
        }
        if vars.is_empty() {
            continue;
        }
        capacity_factor.set(kind, (cap > 0.0).then(|| out / cap));
        operation_rate.set(kind, Some(operating as f64 / vars.len() as f64));
        variance.set(kind, mean(&vars));
        all_out += to_mwh(kind, out);
        all_cap += to_mwh(kind, cap);
        all_operating += operating;
        all_count += vars.len();
        all_var.extend(vars);
    }
    capacity_factor.overall = (all_cap > 0.0).then(|| all_out / all_cap);
    operation_rate.overall = (all_count > 0).then(|| all_operating as f64 / all_count as f64);
    variance.overall = mean(&all_var);

    let mut ratios = Vec::new();
    let mut peak = 0.0f64;
    for (j, p) in built.plants.iter().enumerate() {
        let limit = match p.new_capacity {
            Some(_) => config.expansion.inventory_per_mw(p.plant.kind) * capacity[j],
            None => p.plant.max_inventory,
        };
        for &s in &stock[j] {
            peak = peak.max(s);
            if limit > 0.0 {
                ratios.push(s / limit);
            }
        }
    }

    // Demand levels: chosen variables in the potential case, row activity otherwise.
    let mut demand = DemandLevels {
        biomass_elec_mw: 0.0,
        biogas_elec_mw: 0.0,
        ethanol_ml_per_day: 0.0,
    };
    if !built.demand_vars.is_empty() {
        for &(kind, var) in &built.demand_vars {
            let v = x[var.0];
            match kind {
                PlantKind::BiomassPower => demand.biomass_elec_mw = v,
                PlantKind::BiogasPower => demand.biogas_elec_mw = v,
                PlantKind::Ethanol => demand.ethanol_ml_per_day = v,
            }
        }
    } else {
        let hours = grid.total_hours();
        demand.biomass_elec_mw = energy.biomass_power_mwh / hours;
        demand.biogas_elec_mw = energy.biogas_power_mwh / hours;
        demand.ethanol_ml_per_day = energy.ethanol_liters / 1e6 / grid.total_days();
    }

    let expansion = if built.extra_supply.is_empty() && !built.plants.iter().any(|p| p.is_new()) {
        None
    } else {
        let mut entries = Vec::new();
        let mut molasses = 0.0;
        for s in &built.extra_supply {
            let tons = x[s.var.0];
            if tons > 0.0 {
                let id = dataset.biomass[s.biomass].id;
                if id == crate::datamodel::BiomassId::Molasses {
                    molasses += tons;
                }
                entries.push(ExtraSupplyEntry {
                    province_id: dataset.suppliers[s.supplier].province_id,
                    biomass: id.key().to_string(),
                    tons,
                });
            }
        }
        let new_plants: Vec<NewPlantEntry> = built
            .plants
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_new())
            .map(|(j, p)| NewPlantEntry {
                plant_id: p.plant.plant_id,
                kind: p.plant.kind,
                location: p.plant.location,
                capacity_mw: capacity[j],
            })
            .collect();
        Some(ExpansionSummary {
            extra_supply_tons: built.extra_supply.iter().map(|s| x[s.var.0]).sum(),
            extra_supply: entries,
            molasses_extra_tons: molasses,
            sugarcane_equivalent_tons: super::sugarcane_equivalent(molasses, config.scenario.molasses_per_sugarcane),
            new_capacity_mw: new_plants.iter().map(|p| p.capacity_mw).sum(),
            new_plants,
        })
    };

    Ok(ScenarioReport {
        total_cost: cost.total(),
        cost,
        energy,
        capacity_factor,
        operation_rate,
        inventory: InventoryMetrics {
            utilization: mean(&ratios),
            variance,
            peak_tons: peak,
        },
        demand,
        peak_bound: built.peak.map(|m| x[m.0]),
        expansion,
        holding_cost_defaulted: built
            .plants
            .iter()
            .filter(|p| p.holding_cost_defaulted && !p.is_new())
            .map(|p| p.plant.plant_id)
            .collect(),
        monthly: monthly_tables(built, solution, dataset, &output, &stock),
    })
}

fn monthly_tables(
    built: &BuiltModel,
    solution: &Solution,
    dataset: &Dataset,
    output: &[Vec<f64>],
    stock: &[Vec<f64>],
) -> MonthlyTables {
    let x = &solution.primal;
    let months = dataset.months();
    let nb = dataset.biomass.len();
    let mut used = vec![vec![0.0; months]; nb];
    for s in &built.x {
        used[s.biomass][s.month] += x[s.var.0];
    }
    let mut available: Vec<Vec<f64>> = (0..nb).map(|b| (0..months).map(|t| dataset.available(b, t)).collect()).collect();
    for s in &built.extra_supply {
        for t in 0..months {
            available[s.biomass][t] += s.shares[t] * x[s.var.0];
        }
    }
    let mut tables = MonthlyTables {
        biomass_usage: Vec::new(),
        production: Vec::new(),
        inventory: Vec::new(),
    };
    for b in 0..nb {
        for t in 0..months {
            tables
                .biomass_usage
                .push((dataset.biomass[b].id.key().to_string(), t + 1, used[b][t], available[b][t]));
        }
    }
    for (j, p) in built.plants.iter().enumerate() {
        for t in 0..months {
            tables.production.push((p.plant.plant_id, p.plant.kind, t + 1, output[j][t]));
            tables.inventory.push((p.plant.plant_id, t + 1, stock[j][t]));
        }
    }
    tables
}

impl MonthlyTables {
    pub fn biomass_usage_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["biomass", "month", "used", "available"]).expect("in-memory write");
        for (b, t, used, avail) in &self.biomass_usage {
            w.write_record([b.clone(), t.to_string(), used.to_string(), avail.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn production_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["plant", "kind", "month", "output"]).expect("in-memory write");
        for (p, kind, t, out) in &self.production {
            w.write_record([p.to_string(), kind.to_string(), t.to_string(), out.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn inventory_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["plant", "month", "tons"]).expect("in-memory write");
        for (p, t, tons) in &self.inventory {
            w.write_record([p.to_string(), t.to_string(), tons.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
