//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::time::{Duration, Instant};

use bioflow::cli::{cmd_run, RunArgs, ScenarioArg};
use bioflow::conversion::{mwh_equivalent, EnergyKind};
use bioflow::datamodel::{builtin_biomass_table, synth_dataset, BiomassId, DemandTargets};
use bioflow::lp::{check_certificate, solve, SolveStatus, Tolerances, ACCEPT_TOL};
use bioflow::scenarios::{cost_increase_ratio, DemandMode, Planner, ScenarioKind, ScenarioOutcome, TargetSource};
use bioflow::transport::{round2, DistanceProvider, TransportConfig};
use bioflow::Config;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(elapsed: Duration, limit: Duration, msg: String) -> Check {
    ensure(elapsed < limit, format!("{msg}; {:.3}s of {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
}

const TABLE5: [(BiomassId, f64); 17] = [
    (BiomassId::RiceStraw, 1.01),
    (BiomassId::RiceHusk, 0.51),
    (BiomassId::SugarcaneLeaves, 0.95),
    (BiomassId::Bagasse, 1.13),
    (BiomassId::Molasses, 0.23),
    (BiomassId::CornLeavesAndTops, 2.21),
    (BiomassId::CornCob, 0.99),
    (BiomassId::PeeledCassava, 0.41),
    (BiomassId::CassavaRhizome, 0.76),
    (BiomassId::CassavaFiber, 0.41),
    (BiomassId::CassavaPeels, 0.73),
    (BiomassId::OilPalmBunch, 0.47),
    (BiomassId::OilPalmFiber, 0.72),
    (BiomassId::OilPalmShell, 0.45),
    (BiomassId::CoconutBunch, 0.51),
    (BiomassId::CoconutBract, 1.19),
    (BiomassId::CoconutShell, 0.41),
];

fn transport_table() -> Check {
    let start = Instant::now();
    let transport = TransportConfig::default();
    let table = builtin_biomass_table();
    let mut mismatches = Vec::new();
    for (id, expected) in TABLE5 {
        let spec = table.iter().find(|b| b.id == id).expect("table row");
        let got = round2(transport.unit_cost(spec));
        if got != expected {
            mismatches.push(format!("{}: {got} != {expected}", id.key()));
        }
    }
    let msg = format!("{} of 17 unit costs match", 17 - mismatches.len());
    if !mismatches.is_empty() {
        return Err(format!("{msg}: {}", mismatches.join(", ")));
    }
    within(start.elapsed(), Duration::from_secs(1), msg)
}

fn biogas_ratios() -> Check {
    let ratios: Vec<(BiomassId, f64)> = builtin_biomass_table()
        .iter()
        .filter_map(|b| Some((b.id, b.biogas_heat_equiv? / b.methane_content?)))
        .collect();
    let bad: Vec<String> = ratios
        .iter()
        .filter(|(_, r)| (r - 478.05).abs() > 0.05)
        .map(|(id, r)| format!("{}={r:.3}", id.key()))
        .collect();
    ensure(
        ratios.len() == 11 && bad.is_empty(),
        format!("{} eligible rows, outside 478.05 +/- 0.05: [{}]", ratios.len(), bad.join(", ")),
    )
}

fn energy_identity() -> Check {
    let mwh = mwh_equivalent(EnergyKind::Electricity, 2550.4 * 8760.0)
        + mwh_equivalent(EnergyKind::Electricity, 35.65 * 8760.0)
        + mwh_equivalent(EnergyKind::Ethanol, 4.79e6 * 365.0);
    let twh = mwh / 1e6;
    ensure((twh / 33.02 - 1.0).abs() <= 1e-3, format!("{twh:.4} TWh vs 33.02"))
}

fn cost_ratio_identity() -> Check {
    let ratio = cost_increase_ratio(375.22, 499.99);
    let components: f64 = 33.94 + 69.9 + 20.87;
    let total = 499.99 - 375.22;
    ensure(
        (ratio * 100.0 - 33.25).abs() <= 0.05 && (components - total).abs() <= 0.1,
        format!("increase {:.3}%, components {components:.2} vs total {total:.2} bn THB", ratio * 100.0),
    )
}

fn solver_oracle() -> Check {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut optimal = 0;
    for seed in 0..120u64 {
        let model = common::random_lp(seed);
        let oracle = common::vertex_oracle(&model).expect("generated LPs are feasible");
        let s = solve(&model, &tol).map_err(|e| format!("seed {seed}: {e}"))?;
        if s.status != SolveStatus::Optimal {
            return Err(format!("seed {seed}: {:?}, oracle {oracle}", s.status));
        }
        if (s.objective - oracle).abs() > 1e-6 * oracle.abs().max(1.0) {
            return Err(format!("seed {seed}: simplex {} vs oracle {oracle}", s.objective));
        }
        let cert = check_certificate(&model, &s);
        if !cert.passes(ACCEPT_TOL) {
            return Err(format!("seed {seed}: certificate {cert:?}"));
        }
        optimal += 1;
    }
    within(start.elapsed(), Duration::from_secs(30), format!("{optimal} LPs agree with the oracle"))
}

fn seven() -> bioflow::Dataset {
    synth_dataset(7, 6, 5, 8).expect("synthetic dataset")
}

fn run(config: &Config, kind: ScenarioKind) -> Result<ScenarioOutcome, String> {
    let ds = seven();
    let distances = DistanceProvider::from_config(&config.transport);
    let outcome = Planner::new(&ds, config, &distances).run(kind).map_err(|e| e.to_string())?;
    if outcome.status != SolveStatus::Optimal {
        return Err(format!("{} ended {:?}", kind.name(), outcome.status));
    }
    Ok(outcome)
}

fn extra_supply(o: &ScenarioOutcome) -> f64 {
    o.report.as_ref().and_then(|r| r.expansion.as_ref()).map_or(f64::NAN, |e| e.extra_supply_tons)
}

fn scenario_suite() -> Check {
    let start = Instant::now();
    let config = Config::default();

    let min_cost = run(&config, ScenarioKind::MinCost)?;
    let residual = common::max_relative_violation(&min_cost.built.model, &min_cost.solution.primal);
    if residual > 1e-6 {
        return Err(format!("(a) min-cost residual {residual:e}"));
    }

    let full = run(&config, ScenarioKind::FullOperation)?;
    let (mr, fr) = (min_cost.report.as_ref().unwrap(), full.report.as_ref().unwrap());
    let rate = fr.operation_rate.overall.unwrap_or(0.0);
    if rate != 1.0 {
        return Err(format!("(b) operation rate {rate}"));
    }
    if fr.inventory.peak_tons > mr.inventory.peak_tons + 1e-6 {
        return Err(format!("(b) peak {} > min-cost peak {}", fr.inventory.peak_tons, mr.inventory.peak_tons));
    }
    if fr.total_cost < mr.total_cost * (1.0 - 1e-9) {
        return Err(format!("(b) cost {} < min-cost cost {}", fr.total_cost, mr.total_cost));
    }

    let potential = run(&config, ScenarioKind::Potential)?;
    let caps = seven().demand;
    for &(kind, var) in &potential.built.demand_vars {
        let d = potential.solution.primal[var.0];
        if d > caps.for_kind(kind) + 1e-9 {
            return Err(format!("(c) {} demand {d} over cap {}", kind.as_str(), caps.for_kind(kind)));
        }
    }

    let mut at = config.clone();
    at.expansion.targets = TargetSource::Potential;
    let at_potential = extra_supply(&run(&at, ScenarioKind::Expansion)?);
    if !(at_potential <= 1e-6) {
        return Err(format!("(d) extra supply at potential {at_potential}"));
    }
    let levels = potential.report.as_ref().unwrap().demand;
    let above = DemandTargets {
        biomass_elec_mw: levels.biomass_elec_mw * 1.5,
        biogas_elec_mw: levels.biogas_elec_mw * 1.5,
        ethanol_ml_per_day: levels.ethanol_ml_per_day,
    };
    let ds = seven();
    let distances = DistanceProvider::from_config(&config.transport);
    let mut passes = Vec::new();
    let (built, sol) = Planner::new(&ds, &config, &distances)
        .expansion_with_siting(&above, &mut passes)
        .map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Optimal {
        return Err(format!("(d) expansion above potential ended {:?}", sol.status));
    }
    let above_supply: f64 = built.extra_supply.iter().map(|s| sol.primal[s.var.0]).sum();
    if !(above_supply > 0.0) {
        return Err(format!("(d) extra supply above potential {above_supply}"));
    }

    within(
        start.elapsed(),
        Duration::from_secs(60),
        format!(
            "residual {residual:.1e}; peak {:.1} <= {:.1}; cost {:.4e} >= {:.4e}; s+ {at_potential:.1e} / {above_supply:.1}",
            fr.inventory.peak_tons, mr.inventory.peak_tons, fr.total_cost, mr.total_cost
        ),
    )
}

fn conservation() -> Check {
    let mut config = Config::default();
    let mut worst_flow = 0.0f64;
    let mut worst_demand = 0.0f64;
    let mut count = 0;
    for (initial, mode) in [(0.0, DemandMode::Equality), (25.0, DemandMode::AtLeast)] {
        config.scenario.initial_inventory = initial;
        config.scenario.demand_mode = mode;
        for kind in [ScenarioKind::Potential, ScenarioKind::MinCost, ScenarioKind::FullOperation, ScenarioKind::Expansion] {
            let o = run(&config, kind)?;
            worst_flow = worst_flow.max(common::conservation_error(&o.built, &o.solution, initial));
            worst_demand = worst_demand.max(common::demand_violation(&o.built, &o.solution));
            count += 1;
        }
    }
    ensure(
        worst_flow <= 1e-9 && worst_demand <= 1e-6,
        format!("{count} instances; flow error {worst_flow:.1e}, demand error {worst_demand:.1e}"),
    )
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let mut args = RunArgs::new(ScenarioArg::Fullop, dir.path().join(name));
        args.dump_model = true;
        let code = cmd_run(&args, &mut std::io::sink(), &mut std::io::sink());
        if code != 0 {
            return Err(format!("run {name} exited {code}"));
        }
        outputs.push(args.out);
    }
    let files = ["report.json", "biomass_usage.csv", "production.csv", "inventory.csv", "model.lp"];
    for f in files {
        let a = std::fs::read(outputs[0].join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(outputs[1].join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            return Err(format!("{f} differs"));
        }
    }
    Ok(format!("{} files byte-identical", files.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("transport unit costs", transport_table),
        ("biogas heat ratios", biogas_ratios),
        ("energy identity", energy_identity),
        ("cost-ratio identity", cost_ratio_identity),
        ("solver oracle", solver_oracle),
        ("desk-scale scenarios", scenario_suite),
        ("conservation", conservation),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                println!("FAIL {} {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
