//! Scenario orchestration: prerequisite runs, lexicographic passes and
//! two-round siting.

use log::info;
use serde::Serialize;

use crate::datamodel::{DemandTargets, PlantKind};
use crate::lp::{solve, Solution, SolveStatus};

use super::build::{BuiltModel, Planner};
use super::report::{evaluate, ScenarioReport};
use super::{center_of_gravity, CandidateSite, DemandSource, ScenarioError, TargetSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Potential,
    MinCost,
    FullOperation,
    Expansion,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Potential => "potential",
            ScenarioKind::MinCost => "mincost",
            ScenarioKind::FullOperation => "fullop",
            ScenarioKind::Expansion => "expand",
        }
    }
}

/// One LP solve within a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassInfo {
    pub name: String,
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: usize,
    pub rows: usize,
    pub columns: usize,
}

/// Result of a scenario run. `built` and `solution` belong to the last pass attempted.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub kind: ScenarioKind,
    pub status: SolveStatus,
    pub passes: Vec<PassInfo>,
    pub built: BuiltModel,
    pub solution: Solution,
    pub report: Option<ScenarioReport>,
}

impl ScenarioOutcome {
    pub fn iterations(&self) -> usize {
        self.passes.iter().map(|p| p.iterations).sum()
    }
}

/// Slack left on the peak-stock bound carried into the cost pass.
pub(crate) fn pass_slack(value: f64) -> f64 {
    value + 1e-6f64.max(1e-6 * value.abs())
}

/// Slack on the extra-supply total carried into the capacity pass. Tighter
/// than `pass_slack` since the capacity pass spends whatever it is given.
pub(crate) fn supply_slack(value: f64) -> f64 {
    value + 1e-7 * value.abs().max(1.0)
}

impl<'a> Planner<'a> {
    fn solve_pass(&self, name: &str, built: &BuiltModel, passes: &mut Vec<PassInfo>) -> Result<Solution, ScenarioError> {
        let solution = solve(&built.model, &self.config.solver)?;
        info!(
            "{name}: {:?}, objective {:.6e}, {} iterations ({} rows x {} columns)",
            solution.status,
            solution.objective,
            solution.iterations,
            built.model.num_constraints(),
            built.model.num_vars()
        );
        passes.push(PassInfo {
            name: name.to_string(),
            status: solution.status,
            objective: solution.objective,
            iterations: solution.iterations,
            rows: built.model.num_constraints(),
            columns: built.model.num_vars(),
        });
        Ok(solution)
    }

    fn finish(
        &self,
        kind: ScenarioKind,
        passes: Vec<PassInfo>,
        built: BuiltModel,
        solution: Solution,
    ) -> Result<ScenarioOutcome, ScenarioError> {
        let report = if solution.is_optimal() {
            Some(evaluate(&built, &solution, self.dataset, self.config)?)
        } else {
            None
        };
        Ok(ScenarioOutcome {
            kind,
            status: solution.status,
            passes,
            built,
            solution,
            report,
        })
    }

    /// Demand levels chosen by the potential model.
    fn potential_levels(built: &BuiltModel, solution: &Solution) -> DemandTargets {
        let mut d = DemandTargets::ZERO;
        for &(kind, var) in &built.demand_vars {
            let v = solution.primal[var.0].max(0.0);
            match kind {
                PlantKind::BiomassPower => d.biomass_elec_mw = v,
                PlantKind::BiogasPower => d.biogas_elec_mw = v,
                PlantKind::Ethanol => d.ethanol_ml_per_day = v,
            }
        }
        d
    }

    /// Runs the potential model and returns its demand levels, or the failed pass.
    fn potential_demands(
        &self,
        passes: &mut Vec<PassInfo>,
    ) -> Result<Result<DemandTargets, (BuiltModel, Solution)>, ScenarioError> {
        let built = self.build_potential()?;
        let solution = self.solve_pass("potential", &built, passes)?;
        if !solution.is_optimal() {
            return Ok(Err((built, solution)));
        }
        Ok(Ok(Self::potential_levels(&built, &solution)))
    }

    fn cost_demands(
        &self,
        passes: &mut Vec<PassInfo>,
    ) -> Result<Result<DemandTargets, (BuiltModel, Solution)>, ScenarioError> {
        match self.config.scenario.demand_source {
            DemandSource::Dataset => Ok(Ok(self.dataset.demand)),
            DemandSource::Potential => self.potential_demands(passes),
        }
    }

    /// Builds, solves and evaluates one scenario.
    pub fn run(&self, kind: ScenarioKind) -> Result<ScenarioOutcome, ScenarioError> {
        let mut passes = Vec::new();
        match kind {
            ScenarioKind::Potential => {
                let built = self.build_potential()?;
                let solution = self.solve_pass("potential", &built, &mut passes)?;
                self.finish(kind, passes, built, solution)
            }
            ScenarioKind::MinCost => {
                let demands = match self.cost_demands(&mut passes)? {
                    Ok(d) => d,
                    Err((built, solution)) => return self.finish(kind, passes, built, solution),
                };
                let built = self.build_min_cost(&demands)?;
                let solution = self.solve_pass("min-cost", &built, &mut passes)?;
                self.finish(kind, passes, built, solution)
            }
            ScenarioKind::FullOperation => {
                let demands = match self.cost_demands(&mut passes)? {
                    Ok(d) => d,
                    Err((built, solution)) => return self.finish(kind, passes, built, solution),
                };
                let (built, solution) = self.full_operation_passes(&demands, &mut passes)?;
                self.finish(kind, passes, built, solution)
            }
            ScenarioKind::Expansion => {
                let targets = match self.config.expansion.targets {
                    TargetSource::Dataset => self.dataset.demand,
                    TargetSource::Potential => match self.potential_demands(&mut passes)? {
                        Ok(d) => d,
                        Err((built, solution)) => return self.finish(kind, passes, built, solution),
                    },
                };
                let (built, solution) = self.expansion_with_siting(&targets, &mut passes)?;
                self.finish(kind, passes, built, solution)
            }
        }
    }

    /// Pass 1 minimizes peak stock; pass 2 minimizes cost with the peak held.
    pub fn full_operation_passes(
        &self,
        demands: &DemandTargets,
        passes: &mut Vec<PassInfo>,
    ) -> Result<(BuiltModel, Solution), ScenarioError> {
        let mut built = self.build_full_operation(demands)?;
        let first = self.solve_pass("peak-inventory", &built, passes)?;
        if !first.is_optimal() {
            return Ok((built, first));
        }
        self.full_operation_cost_pass(&mut built, pass_slack(first.objective));
        let second = self.solve_pass("full-operation-cost", &built, passes)?;
        Ok((built, second))
    }

    /// Pass 1 minimizes extra supply; pass 2 minimizes new capacity with it held.
    pub fn expansion_passes(
        &self,
        targets: &DemandTargets,
        sites: &[CandidateSite],
        passes: &mut Vec<PassInfo>,
    ) -> Result<(BuiltModel, Solution), ScenarioError> {
        let mut built = self.build_expansion(targets, sites)?;
        let first = self.solve_pass("extra-supply", &built, passes)?;
        if !first.is_optimal() {
            return Ok((built, first));
        }
        self.expansion_capacity_pass(&mut built, supply_slack(first.objective));
        let second = self.solve_pass("new-capacity", &built, passes)?;
        Ok((built, second))
    }

    /// Expansion at configured sites, or at center-of-gravity sites found
    /// from a first round with one virtual site per kind.
    pub fn expansion_with_siting(
        &self,
        targets: &DemandTargets,
        passes: &mut Vec<PassInfo>,
    ) -> Result<(BuiltModel, Solution), ScenarioError> {
        if !self.config.expansion.sites.is_empty() {
            return self.expansion_passes(targets, &self.config.expansion.sites, passes);
        }
        let centroid = self.supplier_centroid();
        let virtual_sites: Vec<CandidateSite> = [PlantKind::BiomassPower, PlantKind::BiogasPower]
            .into_iter()
            .map(|kind| CandidateSite { kind, location: centroid })
            .filter(|s| {
                let q = s.technology().expect("power site");
                self.dataset.biomass.iter().any(|b| b.supports(q))
            })
            .collect();
        let (built, solution) = self.expansion_passes(targets, &virtual_sites, passes)?;
        if !solution.is_optimal() {
            return Ok((built, solution));
        }
        let sites = self.gravity_sites(&built, &solution)?;
        self.expansion_passes(targets, &sites, passes)
    }

    /// One site per new plant that received feedstock, weighted by tons x unit haulage cost.
    pub fn gravity_sites(&self, built: &BuiltModel, solution: &Solution) -> Result<Vec<CandidateSite>, ScenarioError> {
        let ds = self.dataset;
        let mut sites = Vec::new();
        for (j, slot) in built.plants.iter().enumerate() {
            if !slot.is_new() {
                continue;
            }
            let mut weights = vec![0.0; ds.suppliers.len()];
            for s in built.x.iter().filter(|s| s.plant == j) {
                let unit = self.config.transport.unit_cost(&ds.biomass[s.biomass]);
                weights[s.supplier] += solution.primal[s.var.0].max(0.0) * unit;
            }
            let points: Vec<(f64, f64, f64)> = ds
                .suppliers
                .iter()
                .zip(&weights)
                .map(|(s, &w)| (s.location.lat, s.location.lon, w))
                .collect();
            match center_of_gravity(&points) {
                Ok(location) => sites.push(CandidateSite {
                    kind: slot.plant.kind,
                    location,
                }),
                Err(ScenarioError::AllZeroWeights) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(sites)
    }
}
