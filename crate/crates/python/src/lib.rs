//! Python bindings: reference tables, unit conversions, the LP solver and
//! scenario runs. Structured results come back as plain dicts and lists.

use std::path::Path;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use bioflow_core::cli::table_csv;
use bioflow_core::conversion::yield_per_ton;
use bioflow_core::datamodel::{
    builtin_spec, load_dataset, synth_dataset, write_plants_csv, write_suppliers_csv, BiomassId, BiomassSpec,
    Dataset, Location, Technology,
};
use bioflow_core::lp::{parse_model_text, solve, Tolerances};
use bioflow_core::scenarios::{Planner, ScenarioKind};
use bioflow_core::transport::{self, DistanceProvider, TransportConfig};
use bioflow_core::Config;

fn invalid(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spec(biomass: &str) -> PyResult<BiomassSpec> {
    let id: BiomassId = biomass.parse().map_err(|s| invalid(format!("unknown biomass `{s}`")))?;
    Ok(builtin_spec(id))
}

fn to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(invalid)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Built-in reference table as CSV text: prices, heat, biogas, density or transport.
#[pyfunction]
fn table(which: &str) -> PyResult<String> {
    table_csv(which).ok_or_else(|| invalid(format!("unknown table `{which}`")))
}

/// Unrounded haulage cost in THB per ton-km with the default trucks.
#[pyfunction]
fn unit_cost(biomass: &str) -> PyResult<f64> {
    Ok(TransportConfig::default().unit_cost(&spec(biomass)?))
}

#[pyfunction]
fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    transport::haversine_km(Location::new(lat1, lon1), Location::new(lat2, lon2))
}

/// Output per ton for technology code 1..=5: MWh at efficiency `eta`, or liters for fermentation.
#[pyfunction]
#[pyo3(signature = (biomass, technology, eta=1.0))]
fn output_per_ton(biomass: &str, technology: u8, eta: f64) -> PyResult<f64> {
    let tech = Technology::from_code(technology).ok_or_else(|| invalid(format!("bad technology {technology}")))?;
    yield_per_ton(&spec(biomass)?, tech, eta).map_err(invalid)
}

/// Solves an LP given in the text format; returns status, objective, primal values by name and iterations.
#[pyfunction]
fn solve_lp(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let model = parse_model_text(text).map_err(invalid)?;
    let solution = solve(&model, &Tolerances::default()).map_err(invalid)?;
    let primal: serde_json::Map<String, serde_json::Value> = model
        .variables
        .iter()
        .zip(&solution.primal)
        .map(|(v, &x)| (v.name.clone(), x.into()))
        .collect();
    to_py(
        py,
        &serde_json::json!({
            "status": solution.status,
            "objective": solution.objective,
            "primal": primal,
            "iterations": solution.iterations,
        }),
    )
}

/// Synthetic dataset as `(suppliers_csv, plants_csv)`.
#[pyfunction]
#[pyo3(signature = (seed=7, suppliers=6, biomass=5, plants=8))]
fn synth_csv(seed: u64, suppliers: usize, biomass: usize, plants: usize) -> PyResult<(String, String)> {
    let ds = synth_dataset(seed, suppliers, biomass, plants).map_err(invalid)?;
    Ok((write_suppliers_csv(&ds), write_plants_csv(&ds)))
}

fn scenario_kind(name: &str) -> PyResult<ScenarioKind> {
    [ScenarioKind::Potential, ScenarioKind::MinCost, ScenarioKind::FullOperation, ScenarioKind::Expansion]
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| invalid(format!("unknown scenario `{name}`")))
}

/// Runs a scenario on CSV files, or on a synthetic dataset when no paths are given.
#[pyfunction]
#[pyo3(signature = (scenario, config=None, suppliers=None, plants=None, seed=7, synth_size=(6, 5, 8)))]
fn run_scenario(
    py: Python<'_>,
    scenario: &str,
    config: Option<&str>,
    suppliers: Option<&str>,
    plants: Option<&str>,
    seed: u64,
    synth_size: (usize, usize, usize),
) -> PyResult<Py<PyAny>> {
    let kind = scenario_kind(scenario)?;
    let config = match config {
        Some(text) => Config::from_toml(text).map_err(invalid)?,
        None => Config::default(),
    };
    let dataset: Dataset = match (suppliers, plants) {
        (Some(s), Some(p)) => load_dataset(Path::new(s), Path::new(p), &config).map_err(|e| PyIOError::new_err(e.to_string()))?,
        (None, None) => synth_dataset(seed, synth_size.0, synth_size.1, synth_size.2).map_err(invalid)?,
        _ => return Err(invalid("suppliers and plants must be given together")),
    };
    let distances = DistanceProvider::from_config(&config.transport);
    let outcome = py
        .detach(|| Planner::new(&dataset, &config, &distances).run(kind))
        .map_err(invalid)?;
    to_py(
        py,
        &serde_json::json!({
            "scenario": kind.name(),
            "status": outcome.status,
            "objective": outcome.solution.objective,
            "passes": outcome.passes,
            "report": outcome.report,
        }),
    )
}

#[pymodule]
fn bioflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(unit_cost, m)?)?;
    m.add_function(wrap_pyfunction!(haversine_km, m)?)?;
    m.add_function(wrap_pyfunction!(output_per_ton, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lp, m)?)?;
    m.add_function(wrap_pyfunction!(synth_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
