//! LP builders: the flow core shared by every scenario and the four
//! scenario-specific objectives.

use crate::config::Config;
use crate::conversion::{yield_per_ton, ETHANOL_MWH_PER_LITER};
use crate::datamodel::{Dataset, DemandTargets, Location, Plant, PlantKind};
use crate::lp::{LpModel, ObjectiveSense, RowId, Sense, VarId};
use crate::transport::DistanceProvider;

use super::{CandidateSite, DemandMode, ScenarioError};

/// Id given to the first new plant of an expansion run.
pub const NEW_PLANT_ID_BASE: u32 = 9001;

/// A plant taking part in the model.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSlot {
    /// For new plants `capacity` and `max_inventory` are 0 and the size is `new_capacity`.
    pub plant: Plant,
    pub new_capacity: Option<VarId>,
    /// Output per ton of each dataset biomass (MWh or liters); `None` if ineligible.
    pub yields: Vec<Option<f64>>,
    /// THB per unit of output.
    pub operating_cost: f64,
    /// THB per ton-month.
    pub holding_cost: f64,
    pub holding_cost_defaulted: bool,
}

impl PlantSlot {
    pub fn is_new(&self) -> bool {
        self.new_capacity.is_some()
    }
}

/// `x[i,b,j,t]`, tons shipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shipment {
    pub supplier: usize,
    pub biomass: usize,
    pub plant: usize,
    pub month: usize,
    pub var: VarId,
    pub km: f64,
    /// THB per ton at the gate.
    pub biomass_cost: f64,
    /// THB per ton over the whole trip.
    pub transport_cost: f64,
}

/// `u[b,j,t]` or `v[b,j,t]`, tons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StockVar {
    pub biomass: usize,
    pub plant: usize,
    pub month: usize,
    pub var: VarId,
}

/// `e[j,t]`: MWh for power plants, liters for ethanol plants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputVar {
    pub plant: usize,
    pub month: usize,
    pub var: VarId,
}

/// `s+[i,b]`: extra annual tons, spread over months by `shares`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraSupply {
    pub supplier: usize,
    pub biomass: usize,
    pub var: VarId,
    pub shares: Vec<f64>,
}

/// A demand row; `month` is `None` for the annual ethanol row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandRow {
    pub kind: PlantKind,
    pub month: Option<usize>,
    pub row: RowId,
}

/// An LP together with maps from its columns back to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltModel {
    pub model: LpModel,
    pub plants: Vec<PlantSlot>,
    pub x: Vec<Shipment>,
    pub u: Vec<StockVar>,
    pub v: Vec<StockVar>,
    pub e: Vec<OutputVar>,
    /// Potential case: demand levels (MW, or ML/day for ethanol).
    pub demand_vars: Vec<(PlantKind, VarId)>,
    pub demand_rows: Vec<DemandRow>,
    /// Full-operation case: bound on every plant's monthly stock.
    pub peak: Option<VarId>,
    pub extra_supply: Vec<ExtraSupply>,
    /// Full-operation floors, one per plant.
    pub floor_rows: Vec<RowId>,
}

impl BuiltModel {
    /// Every column id, grouped by the map that owns it.
    pub fn column_groups(&self) -> Vec<(&'static str, Vec<VarId>)> {
        vec![
            ("x", self.x.iter().map(|s| s.var).collect()),
            ("u", self.u.iter().map(|s| s.var).collect()),
            ("v", self.v.iter().map(|s| s.var).collect()),
            ("e", self.e.iter().map(|s| s.var).collect()),
            ("demand", self.demand_vars.iter().map(|d| d.1).collect()),
            ("peak", self.peak.into_iter().collect()),
            ("extra_supply", self.extra_supply.iter().map(|s| s.var).collect()),
            ("new_capacity", self.plants.iter().filter_map(|p| p.new_capacity).collect()),
        ]
    }

    /// Linear cost terms: biomass, transport, operating and holding.
    pub fn cost_terms(&self) -> Vec<(VarId, f64)> {
        let mut terms = Vec::with_capacity(self.x.len() + self.e.len() + self.v.len());
        for s in &self.x {
            let c = s.biomass_cost + s.transport_cost;
            if c != 0.0 {
                terms.push((s.var, c));
            }
        }
        for o in &self.e {
            let c = self.plants[o.plant].operating_cost;
            if c != 0.0 {
                terms.push((o.var, c));
            }
        }
        for s in &self.v {
            let c = self.plants[s.plant].holding_cost;
            if c != 0.0 {
                terms.push((s.var, c));
            }
        }
        terms
    }

    /// Output variables of plants of `kind`, optionally restricted to one month.
    fn outputs_of(&self, kind: PlantKind, month: Option<usize>) -> Vec<VarId> {
        self.e
            .iter()
            .filter(|o| self.plants[o.plant].plant.kind == kind && month.is_none_or(|t| o.month == t))
            .map(|o| o.var)
            .collect()
    }
}

/// Nameplate output of a fixed-size plant in month `t` before derating.
pub fn nameplate(plant: &Plant, dataset: &Dataset, t: usize) -> f64 {
    if plant.kind.is_power() {
        plant.capacity * dataset.timegrid.hours(t)
    } else {
        plant.capacity * dataset.timegrid.days(t)
    }
}

/// Builds scenario LPs for one dataset and configuration.
pub struct Planner<'a> {
    pub dataset: &'a Dataset,
    pub config: &'a Config,
    pub distances: &'a DistanceProvider,
}

impl<'a> Planner<'a> {
    pub fn new(dataset: &'a Dataset, config: &'a Config, distances: &'a DistanceProvider) -> Self {
        Planner {
            dataset,
            config,
            distances,
        }
    }

    fn slot(&self, plant: Plant, new_capacity: Option<VarId>) -> Result<PlantSlot, ScenarioError> {
        let sc = &self.config.scenario;
        let eta = sc.efficiency_for(&plant);
        let mut yields = Vec::with_capacity(self.dataset.biomass.len());
        for spec in &self.dataset.biomass {
            yields.push(if spec.supports(plant.technology) {
                Some(yield_per_ton(spec, plant.technology, eta)?)
            } else {
                None
            });
        }
        if yields.iter().all(Option::is_none) {
            return Err(ScenarioError::NoEligibleFeedstock { plant: plant.plant_id });
        }
        Ok(PlantSlot {
            operating_cost: sc.operating_cost(plant.technology),
            holding_cost: sc.holding_cost_for(&plant),
            holding_cost_defaulted: plant.holding_cost.is_none(),
            plant,
            new_capacity,
            yields,
        })
    }

    fn existing_slots(&self) -> Result<Vec<PlantSlot>, ScenarioError> {
        self.dataset.plants.iter().map(|p| self.slot(p.clone(), None)).collect()
    }

    /// Supply, balance, storage, conversion and capacity constraints (C1-C5).
    pub fn build_flow_core(&self) -> Result<BuiltModel, ScenarioError> {
        let slots = self.existing_slots()?;
        let mut model = LpModel::default();
        self.flow_core(&mut model, slots, &[], &[])
    }

    /// Emits the flow core. New plants get their capacity variable created
    /// here; `extra` adds `s+` terms to the supply rows.
    fn flow_core(
        &self,
        model: &mut LpModel,
        mut slots: Vec<PlantSlot>,
        new_sites: &[(CandidateSite, Option<f64>)],
        extra: &[ExtraSupply],
    ) -> Result<BuiltModel, ScenarioError> {
        let ds = self.dataset;
        let sc = &self.config.scenario;
        let transport = &self.config.transport;
        let months = ds.months();
        let n_biomass = ds.biomass.len();

        for (k, (site, cap)) in new_sites.iter().enumerate() {
            let technology = site.technology().ok_or_else(|| {
                ScenarioError::InvalidConfig("new plants can only be biomass-power or biogas-power".into())
            })?;
            let plant = Plant {
                plant_id: NEW_PLANT_ID_BASE + k as u32,
                kind: site.kind,
                technology,
                capacity: 0.0,
                max_inventory: 0.0,
                holding_cost: None,
                location: site.location,
                efficiency_override: None,
            };
            let var = model.add_var(format!("P_new_{}", plant.plant_id), 0.0, cap.unwrap_or(f64::INFINITY));
            slots.push(self.slot(plant, Some(var))?);
        }

        let mut built = BuiltModel {
            model: LpModel::default(),
            plants: Vec::new(),
            x: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            e: Vec::new(),
            demand_vars: Vec::new(),
            demand_rows: Vec::new(),
            peak: None,
            extra_supply: extra.to_vec(),
            floor_rows: Vec::new(),
        };

        // Distances and per-ton costs for every (supplier, plant) pair.
        let mut km = vec![vec![0.0; slots.len()]; ds.suppliers.len()];
        for (i, s) in ds.suppliers.iter().enumerate() {
            for (j, slot) in slots.iter().enumerate() {
                km[i][j] = if slot.is_new() {
                    self.distances.between(s.location, slot.plant.location)?
                } else {
                    self.distances
                        .distance((s.province_id, s.location), (slot.plant.plant_id, slot.plant.location))?
                };
            }
        }
        let unit_transport: Vec<f64> = ds.biomass.iter().map(|b| transport.unit_cost(b)).collect();

        let mut supply_terms: Vec<Vec<Vec<(VarId, f64)>>> =
            vec![vec![Vec::new(); n_biomass * months]; ds.suppliers.len()];

        for (j, slot) in slots.iter().enumerate() {
            let pid = slot.plant.plant_id;
            let eligible: Vec<usize> = (0..n_biomass).filter(|&b| slot.yields[b].is_some()).collect();
            let mut prev_v: Vec<Option<VarId>> = vec![None; n_biomass];
            for t in 0..months {
                let m = t + 1;
                let cap = if slot.is_new() { f64::INFINITY } else { sc.availability_factor_cap(&slot.plant, ds, t) };
                let e = model.add_var(format!("e_{pid}_{m}"), 0.0, cap);
                built.e.push(OutputVar { plant: j, month: t, var: e });

                let mut convert = vec![(e, 1.0)];
                let mut storage = Vec::with_capacity(eligible.len() + 1);
                for &b in &eligible {
                    let key = ds.biomass[b].id.key();
                    let u = model.add_var(format!("u_{key}_{pid}_{m}"), 0.0, f64::INFINITY);
                    let v = model.add_var(format!("v_{key}_{pid}_{m}"), 0.0, f64::INFINITY);
                    built.u.push(StockVar { biomass: b, plant: j, month: t, var: u });
                    built.v.push(StockVar { biomass: b, plant: j, month: t, var: v });

                    // v_t - v_{t-1} - sum_i x + u = 0 (opening stock on the right at t = 0)
                    let mut balance = vec![(v, 1.0), (u, 1.0)];
                    let rhs = match prev_v[b] {
                        Some(pv) => {
                            balance.push((pv, -1.0));
                            0.0
                        }
                        None => sc.initial_inventory,
                    };
                    for (i, s) in ds.suppliers.iter().enumerate() {
                        let x = model.add_var(format!("x_{}_{key}_{pid}_{m}", s.province_id), 0.0, f64::INFINITY);
                        built.x.push(Shipment {
                            supplier: i,
                            biomass: b,
                            plant: j,
                            month: t,
                            var: x,
                            km: km[i][j],
                            biomass_cost: ds.biomass[b].price,
                            transport_cost: unit_transport[b] * km[i][j],
                        });
                        balance.push((x, -1.0));
                        supply_terms[i][b * months + t].push((x, 1.0));
                    }
                    model.add_constraint(format!("balance_{key}_{pid}_{m}"), balance, Sense::Eq, rhs);
                    prev_v[b] = Some(v);
                    convert.push((u, -slot.yields[b].expect("eligible")));
                    storage.push((v, 1.0));
                }
                match slot.new_capacity {
                    None => {
                        model.add_constraint(format!("storage_{pid}_{m}"), storage, Sense::Le, slot.plant.max_inventory);
                    }
                    Some(p) => {
                        storage.push((p, -self.config.expansion.inventory_per_mw(slot.plant.kind)));
                        model.add_constraint(format!("storage_{pid}_{m}"), storage, Sense::Le, 0.0);
                        let per_mw = ds.timegrid.hours(t) * sc.availability_factor;
                        model.add_constraint(format!("capacity_{pid}_{m}"), vec![(e, 1.0), (p, -per_mw)], Sense::Le, 0.0);
                    }
                }
                model.add_constraint(format!("convert_{pid}_{m}"), convert, Sense::Eq, 0.0);
            }
        }

        let mut extra_terms: Vec<Vec<Option<&ExtraSupply>>> = vec![vec![None; n_biomass]; ds.suppliers.len()];
        for s in extra {
            extra_terms[s.supplier][s.biomass] = Some(s);
        }
        for (i, s) in ds.suppliers.iter().enumerate() {
            for b in 0..n_biomass {
                for t in 0..months {
                    let mut terms = std::mem::take(&mut supply_terms[i][b * months + t]);
                    if terms.is_empty() {
                        continue;
                    }
                    if let Some(es) = extra_terms[i][b] {
                        if es.shares[t] != 0.0 {
                            terms.push((es.var, -es.shares[t]));
                        }
                    }
                    let name = format!("supply_{}_{}_{}", s.province_id, ds.biomass[b].id.key(), t + 1);
                    model.add_constraint(name, terms, Sense::Le, s.availability[b][t]);
                }
            }
        }

        built.plants = slots;
        built.model = std::mem::take(model);
        Ok(built)
    }

    fn add_demand_rows(&self, built: &mut BuiltModel, demands: &DemandTargets) {
        let sense = match self.config.scenario.demand_mode {
            DemandMode::Equality => Sense::Eq,
            DemandMode::AtLeast => Sense::Ge,
        };
        let grid = &self.dataset.timegrid;
        for kind in [PlantKind::BiomassPower, PlantKind::BiogasPower] {
            let target = demands.for_kind(kind);
            if target == 0.0 && built.outputs_of(kind, None).is_empty() {
                continue;
            }
            for t in 0..grid.len() {
                let terms = built.outputs_of(kind, Some(t)).into_iter().map(|v| (v, 1.0)).collect();
                let row = built.model.add_constraint(
                    format!("demand_{}_{}", kind.as_str(), t + 1),
                    terms,
                    sense,
                    target * grid.hours(t),
                );
                built.demand_rows.push(DemandRow { kind, month: Some(t), row });
            }
        }
        let kind = PlantKind::Ethanol;
        let target = demands.ethanol_ml_per_day;
        let outputs = built.outputs_of(kind, None);
        if target != 0.0 || !outputs.is_empty() {
            let terms = outputs.into_iter().map(|v| (v, 1.0)).collect();
            let row = built.model.add_constraint(
                "demand_ethanol",
                terms,
                sense,
                target * 1e6 * grid.total_days(),
            );
            built.demand_rows.push(DemandRow { kind, month: None, row });
        }
    }

    /// Cheapest plan meeting `demands`.
    pub fn build_min_cost(&self, demands: &DemandTargets) -> Result<BuiltModel, ScenarioError> {
        let mut built = self.build_flow_core()?;
        self.add_demand_rows(&mut built, demands);
        let terms = built.cost_terms();
        built.model.set_objective(ObjectiveSense::Minimize, terms);
        Ok(built)
    }

    /// Largest annual energy output with demand levels capped at the dataset targets.
    pub fn build_potential(&self) -> Result<BuiltModel, ScenarioError> {
        let mut built = self.build_flow_core()?;
        let sense = match self.config.scenario.demand_mode {
            DemandMode::Equality => Sense::Eq,
            DemandMode::AtLeast => Sense::Ge,
        };
        let caps = self.dataset.demand;
        let grid = &self.dataset.timegrid;
        let mut objective = Vec::new();
        for kind in PlantKind::ALL {
            let d = built.model.add_var(format!("D_{}", kind.as_str()), 0.0, caps.for_kind(kind));
            built.demand_vars.push((kind, d));
            if kind.is_power() {
                for t in 0..grid.len() {
                    let mut terms: Vec<(VarId, f64)> =
                        built.outputs_of(kind, Some(t)).into_iter().map(|v| (v, 1.0)).collect();
                    terms.push((d, -grid.hours(t)));
                    let row = built.model.add_constraint(format!("demand_{}_{}", kind.as_str(), t + 1), terms, sense, 0.0);
                    built.demand_rows.push(DemandRow { kind, month: Some(t), row });
                }
                objective.push((d, grid.total_hours()));
            } else {
                let mut terms: Vec<(VarId, f64)> = built.outputs_of(kind, None).into_iter().map(|v| (v, 1.0)).collect();
                terms.push((d, -1e6 * grid.total_days()));
                let row = built.model.add_constraint("demand_ethanol", terms, sense, 0.0);
                built.demand_rows.push(DemandRow { kind, month: None, row });
                objective.push((d, 1e6 * grid.total_days() * ETHANOL_MWH_PER_LITER));
            }
        }
        built.model.set_objective(ObjectiveSense::Maximize, objective);
        Ok(built)
    }

    /// Min-cost model plus per-plant output floors and a peak-stock variable
    /// `M`. The objective is left as `min M` (first pass).
    pub fn build_full_operation(&self, demands: &DemandTargets) -> Result<BuiltModel, ScenarioError> {
        let mut built = self.build_min_cost(demands)?;
        let eps = self.config.scenario.epsilon_operation;
        let ds = self.dataset;
        for (j, slot) in built.plants.iter().enumerate() {
            let pid = slot.plant.plant_id;
            let terms: Vec<(VarId, f64)> = built.e.iter().filter(|o| o.plant == j).map(|o| (o.var, 1.0)).collect();
            let cap: f64 = (0..ds.months()).map(|t| self.config.scenario.availability_factor_cap(&slot.plant, ds, t)).sum();
            let row = built.model.add_constraint(format!("operate_{pid}"), terms, Sense::Ge, eps * cap);
            built.floor_rows.push(row);
        }
        let m = built.model.add_var("M", 0.0, f64::INFINITY);
        built.peak = Some(m);
        for (j, slot) in built.plants.iter().enumerate() {
            let pid = slot.plant.plant_id;
            for t in 0..ds.months() {
                let mut terms: Vec<(VarId, f64)> = built
                    .v
                    .iter()
                    .filter(|s| s.plant == j && s.month == t)
                    .map(|s| (s.var, 1.0))
                    .collect();
                terms.push((m, -1.0));
                built.model.add_constraint(format!("peak_{pid}_{}", t + 1), terms, Sense::Le, 0.0);
            }
        }
        built.model.set_objective(ObjectiveSense::Minimize, vec![(m, 1.0)]);
        Ok(built)
    }

    /// Turns a first-pass full-operation model into the second pass:
    /// `M <= limit` and minimum cost.
    pub fn full_operation_cost_pass(&self, built: &mut BuiltModel, limit: f64) {
        let m = built.peak.expect("full-operation model");
        built.model.set_bounds(m, 0.0, limit);
        let terms = built.cost_terms();
        built.model.set_objective(ObjectiveSense::Minimize, terms);
    }

    /// Existing network plus new plants at `sites` and extra supply `s+`.
    /// The objective is `min sum s+` (first pass).
    pub fn build_expansion(&self, targets: &DemandTargets, sites: &[CandidateSite]) -> Result<BuiltModel, ScenarioError> {
        let ds = self.dataset;
        let slots = self.existing_slots()?;
        let mut model = LpModel::default();

        // Only residues some plant (existing or new) can use get extra supply.
        let new_techs: Vec<_> = sites.iter().filter_map(|s| s.technology()).collect();
        let usable = |b: usize| {
            slots.iter().any(|s| s.yields[b].is_some()) || new_techs.iter().any(|&q| ds.biomass[b].supports(q))
        };
        let mut extra = Vec::new();
        for (i, s) in ds.suppliers.iter().enumerate() {
            for b in 0..ds.biomass.len() {
                if !usable(b) {
                    continue;
                }
                let var = model.add_var(format!("s_plus_{}_{}", s.province_id, ds.biomass[b].id.key()), 0.0, f64::INFINITY);
                extra.push(ExtraSupply {
                    supplier: i,
                    biomass: b,
                    var,
                    shares: monthly_shares(&s.availability[b]),
                });
            }
        }
        let cap = self.config.expansion.max_new_capacity_mw;
        let sites: Vec<(CandidateSite, Option<f64>)> = sites.iter().map(|s| (s.clone(), cap)).collect();
        let mut built = self.flow_core(&mut model, slots, &sites, &extra)?;
        self.add_demand_rows(&mut built, targets);
        let objective = built.extra_supply.iter().map(|s| (s.var, 1.0)).collect();
        built.model.set_objective(ObjectiveSense::Minimize, objective);
        Ok(built)
    }

    /// Second expansion pass: cap total extra supply and minimize new capacity.
    pub fn expansion_capacity_pass(&self, built: &mut BuiltModel, supply_limit: f64) {
        let terms: Vec<(VarId, f64)> = built.extra_supply.iter().map(|s| (s.var, 1.0)).collect();
        built.model.add_constraint("extra_supply_limit", terms, Sense::Le, supply_limit);
        let objective = built.plants.iter().filter_map(|p| p.new_capacity).map(|v| (v, 1.0)).collect();
        built.model.set_objective(ObjectiveSense::Minimize, objective);
    }

    /// Unweighted mean position of the suppliers.
    pub fn supplier_centroid(&self) -> Location {
        let n = self.dataset.suppliers.len() as f64;
        let lat = self.dataset.suppliers.iter().map(|s| s.location.lat).sum::<f64>() / n;
        let lon = self.dataset.suppliers.iter().map(|s| s.location.lon).sum::<f64>() / n;
        Location::new(lat, lon)
    }
}

/// A supplier's monthly share of its annual availability; uniform when it has none.
fn monthly_shares(availability: &[f64]) -> Vec<f64> {
    let total: f64 = availability.iter().sum();
    if total > 0.0 {
        availability.iter().map(|a| a / total).collect()
    } else {
        vec![1.0 / availability.len() as f64; availability.len()]
    }
}

impl super::ScenarioConfig {
    /// Derated monthly output limit of a fixed-size plant.
    pub fn availability_factor_cap(&self, plant: &Plant, dataset: &Dataset, t: usize) -> f64 {
        if plant.kind.is_power() {
            nameplate(plant, dataset, t) * self.availability_factor
        } else {
            nameplate(plant, dataset, t)
        }
    }
}
