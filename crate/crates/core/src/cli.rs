//! The `bioflow` command line: `validate`, `tables` and `run`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Config, ConfigError};
use crate::datamodel::{builtin_biomass_table, load_dataset, synth_dataset, Dataset, DatasetError};
use crate::lp::{write_model_text, SolveStatus};
use crate::scenarios::{DemandMode, PassInfo, Planner, ScenarioKind, ScenarioReport};
use crate::transport::{truck_load, DistanceProvider, TransportConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNBOUNDED: i32 = 4;
pub const EXIT_ITERATION_LIMIT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "bioflow", version, about = "Bio-energy supply chain planner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset and list every problem found.
    Validate(DataArgs),
    /// Print a built-in reference table as CSV.
    Tables {
        /// prices, heat, biogas, density or transport
        #[arg(long)]
        which: String,
    },
    /// Build, solve and report a scenario.
    Run(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub suppliers: Option<PathBuf>,
    #[arg(long)]
    pub plants: Option<PathBuf>,
    /// `supplier_id,plant_id,km` matrix; great-circle estimates otherwise.
    #[arg(long)]
    pub distances: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Potential,
    Mincost,
    Fullop,
    Expand,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Potential => ScenarioKind::Potential,
            ScenarioArg::Mincost => ScenarioKind::MinCost,
            ScenarioArg::Fullop => ScenarioKind::FullOperation,
            ScenarioArg::Expand => ScenarioKind::Expansion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemandModeArg {
    Equality,
    AtLeast,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub scenario: ScenarioArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed of the synthetic dataset used when no CSVs are given.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Synthetic dataset size: suppliers,biomass,plants.
    #[arg(long, default_value = "6,5,8", value_parser = parse_size)]
    pub synth_size: (usize, usize, usize),
    /// Also write the solved LP as `model.lp`.
    #[arg(long)]
    pub dump_model: bool,
    #[arg(long)]
    pub demand_mode: Option<DemandModeArg>,
}

fn parse_size(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad size `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(format!("expected three comma-separated sizes, got `{s}`")),
    }
}

impl RunArgs {
    pub fn new(scenario: ScenarioArg, out: impl Into<PathBuf>) -> Self {
        RunArgs {
            scenario,
            data: DataArgs::default(),
            out: out.into(),
            seed: 7,
            synth_size: (6, 5, 8),
            dump_model: false,
            demand_mode: None,
        }
    }

    /// Arguments that reproduce this invocation.
    pub fn to_argv(&self) -> Vec<String> {
        let mut argv = vec![
            "bioflow".to_string(),
            "run".to_string(),
            self.scenario.to_possible_value().expect("named").get_name().to_string(),
        ];
        let mut push = |flag: &str, value: String| {
            argv.push(flag.to_string());
            argv.push(value);
        };
        for (flag, path) in [
            ("--config", &self.data.config),
            ("--suppliers", &self.data.suppliers),
            ("--plants", &self.data.plants),
            ("--distances", &self.data.distances),
        ] {
            if let Some(p) = path {
                push(flag, p.display().to_string());
            }
        }
        push("--out", self.out.display().to_string());
        push("--seed", self.seed.to_string());
        let (a, b, c) = self.synth_size;
        push("--synth-size", format!("{a},{b},{c}"));
        if let Some(mode) = self.demand_mode {
            push("--demand-mode", mode.to_possible_value().expect("named").get_name().to_string());
        }
        if self.dump_model {
            argv.push("--dump-model".to_string());
        }
        argv
    }
}

/// Reproducibility record written next to every output set.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub scenario: String,
    pub config_path: Option<String>,
    pub suppliers: Option<String>,
    pub plants: Option<String>,
    pub distances: Option<String>,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub solver_iterations: usize,
    pub status: SolveStatus,
    pub outputs: Vec<String>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    scenario: &'a str,
    status: SolveStatus,
    objective: Option<f64>,
    passes: &'a [PassInfo],
    report: Option<&'a ScenarioReport>,
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_IO;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match &cli.command {
        Command::Validate(args) => cmd_validate(args, out, err),
        Command::Tables { which } => cmd_tables(which, out, err),
        Command::Run(args) => cmd_run(args, out, err),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, ConfigError> {
    match path {
        Some(p) => Config::from_path(p),
        None => Ok(Config::default()),
    }
}

fn config_exit(e: &ConfigError) -> i32 {
    match e {
        ConfigError::Io { .. } => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn dataset_exit(e: &DatasetError, err: &mut dyn Write) -> i32 {
    match e {
        DatasetError::Io { .. } => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
        DatasetError::Invalid(errors) => {
            for d in errors {
                let _ = writeln!(err, "{d}");
            }
            EXIT_INVALID
        }
    }
}

fn load_distances(path: Option<&Path>, transport: &TransportConfig) -> Result<DistanceProvider, (i32, String)> {
    let Some(path) = path else {
        return Ok(DistanceProvider::from_config(transport));
    };
    if let Err(e) = std::fs::metadata(path) {
        return Err((EXIT_IO, format!("cannot read {}: {e}", path.display())));
    }
    DistanceProvider::from_csv_path(path, transport).map_err(|e| (EXIT_INVALID, e.to_string()))
}

/// Validates the dataset: 0 valid, 1 with one line per problem, 2 on I/O failure.
pub fn cmd_validate(args: &DataArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match load_config(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return config_exit(&e);
        }
    };
    let (Some(suppliers), Some(plants)) = (&args.suppliers, &args.plants) else {
        let _ = writeln!(err, "error: validate needs --suppliers and --plants");
        return EXIT_IO;
    };
    let dataset = match load_dataset(suppliers, plants, &config) {
        Ok(d) => d,
        Err(e) => return dataset_exit(&e, err),
    };
    let distances = match load_distances(args.distances.as_deref(), &config.transport) {
        Ok(d) => d,
        Err((code, message)) => {
            let _ = writeln!(err, "{message}");
            return code;
        }
    };
    let supplier_ids: Vec<u32> = dataset.suppliers.iter().map(|s| s.province_id).collect();
    let plant_ids: Vec<u32> = dataset.plants.iter().map(|p| p.plant_id).collect();
    if let Err(e) = distances.check_complete(&supplier_ids, &plant_ids) {
        let _ = writeln!(err, "{e}");
        return EXIT_INVALID;
    }
    let _ = writeln!(
        out,
        "ok: {} suppliers, {} biomass types, {} plants, {} months",
        dataset.suppliers.len(),
        dataset.biomass.len(),
        dataset.plants.len(),
        dataset.months()
    );
    EXIT_OK
}

/// The built-in reference table `which` as CSV.
pub fn table_csv(which: &str) -> Option<String> {
    let table = builtin_biomass_table();
    let transport = TransportConfig::default();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let (header, rows): (&[&str], Vec<Vec<String>>) = match which {
        "prices" => (
            &["biomass", "name", "price_thb_per_ton"],
            table.iter().map(|b| vec![b.price.to_string()]).collect(),
        ),
        "heat" => (
            &["biomass", "name", "heat_capacity_mj_per_ton"],
            table.iter().map(|b| vec![opt(b.heat_capacity)]).collect(),
        ),
        "biogas" => (
            &["biomass", "name", "methane_m3_per_kg", "heat_equiv_mj_per_ton"],
            table
                .iter()
                .map(|b| {
                    vec![
                        opt(b.methane_content),
                        b.biogas_heat_equiv.map(|h| format!("{h:.4}")).unwrap_or_default(),
                    ]
                })
                .collect(),
        ),
        "density" => (
            &["biomass", "name", "density_kg_per_m3"],
            table.iter().map(|b| vec![b.density.to_string()]).collect(),
        ),
        "transport" => (
            &["biomass", "name", "truck", "load_tons", "unit_cost_thb_per_ton_km"],
            table
                .iter()
                .map(|b| {
                    let truck = transport.truck_for(b.id);
                    vec![
                        truck.name.clone(),
                        format!("{:.4}", truck_load(b, truck)),
                        format!("{:.2}", transport.unit_cost(b)),
                    ]
                })
                .collect(),
        ),
        _ => return None,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for (b, row) in table.iter().zip(rows) {
        // The heat and biogas tables list only residues with that route.
        if row.iter().all(String::is_empty) {
            continue;
        }
        let mut record = vec![b.id.key().to_string(), b.id.name().to_string()];
        record.extend(row);
        w.write_record(&record).expect("in-memory write");
    }
    Some(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"))
}

pub fn cmd_tables(which: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match table_csv(which) {
        Some(csv) => {
            let _ = out.write_all(csv.as_bytes());
            EXIT_OK
        }
        None => {
            let _ = writeln!(err, "error: unknown table `{which}` (prices, heat, biogas, density, transport)");
            EXIT_INVALID
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file and rename.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

pub fn status_exit(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Unbounded => EXIT_UNBOUNDED,
        SolveStatus::IterationLimit => EXIT_ITERATION_LIMIT,
    }
}

fn run_dataset(args: &RunArgs, config: &Config, err: &mut dyn Write) -> Result<Dataset, i32> {
    match (&args.data.suppliers, &args.data.plants) {
        (Some(s), Some(p)) => load_dataset(s, p, config).map_err(|e| dataset_exit(&e, err)),
        (None, None) => {
            let (ns, nb, np) = args.synth_size;
            synth_dataset(args.seed, ns, nb, np).map_err(|e| {
                let _ = writeln!(err, "error: {e}");
                EXIT_INVALID
            })
        }
        _ => {
            let _ = writeln!(err, "error: --suppliers and --plants must be given together");
            Err(EXIT_IO)
        }
    }
}

/// Runs a scenario and writes its outputs; the exit code reflects the solve status.
pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let started = Instant::now();
    let mut config = match load_config(args.data.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return config_exit(&e);
        }
    };
    if let Some(mode) = args.demand_mode {
        config.scenario.demand_mode = match mode {
            DemandModeArg::Equality => DemandMode::Equality,
            DemandModeArg::AtLeast => DemandMode::AtLeast,
        };
    }
    let dataset = match run_dataset(args, &config, err) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let distances = match load_distances(args.data.distances.as_deref(), &config.transport) {
        Ok(d) => d,
        Err((code, message)) => {
            let _ = writeln!(err, "{message}");
            return code;
        }
    };

    let kind = ScenarioKind::from(args.scenario);
    let outcome = match Planner::new(&dataset, &config, &distances).run(kind) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };

    if let Err(e) = std::fs::create_dir_all(&args.out) {
        let _ = writeln!(err, "error: cannot create {}: {e}", args.out.display());
        return EXIT_IO;
    }
    let report_file = ReportFile {
        scenario: kind.name(),
        status: outcome.status,
        objective: outcome.solution.is_optimal().then_some(outcome.solution.objective),
        passes: &outcome.passes,
        report: outcome.report.as_ref(),
    };
    let mut files: Vec<(&str, Vec<u8>)> = vec![(
        "report.json",
        (serde_json::to_string_pretty(&report_file).expect("report serializes") + "\n").into_bytes(),
    )];
    if let Some(report) = &outcome.report {
        files.push(("biomass_usage.csv", report.monthly.biomass_usage_csv().into_bytes()));
        files.push(("production.csv", report.monthly.production_csv().into_bytes()));
        files.push(("inventory.csv", report.monthly.inventory_csv().into_bytes()));
    }
    if args.dump_model {
        files.push(("model.lp", write_model_text(&outcome.built.model).into_bytes()));
    }
    for (name, bytes) in &files {
        if let Err(e) = write_atomic(&args.out, name, bytes) {
            let _ = writeln!(err, "error: cannot write {name}: {e}");
            return EXIT_IO;
        }
    }

    let path_str = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let manifest = RunManifest {
        command: args.to_argv(),
        scenario: kind.name().to_string(),
        config_path: path_str(&args.data.config),
        suppliers: path_str(&args.data.suppliers),
        plants: path_str(&args.data.plants),
        distances: path_str(&args.data.distances),
        seed: args.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        solver_iterations: outcome.iterations(),
        status: outcome.status,
        outputs: files.iter().map(|(n, _)| n.to_string()).collect(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = write_atomic(&args.out, "manifest.json", manifest_json.as_bytes()) {
        let _ = writeln!(err, "error: cannot write manifest.json: {e}");
        return EXIT_IO;
    }

    let _ = writeln!(out, "{}: {:?}", kind.name(), outcome.status);
    if let Some(r) = &outcome.report {
        let _ = writeln!(
            out,
            "total cost {:.2} THB, energy {:.6} TWh, operation rate {}",
            r.total_cost,
            r.energy.total_twh,
            r.operation_rate.overall.map_or("n/a".to_string(), |v| format!("{:.4}", v))
        );
    }
    status_exit(outcome.status)
}
