use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bioflow::datamodel::{synth_dataset, write_plants_csv, write_suppliers_csv};

fn bioflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bioflow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes a synthetic dataset as CSVs and returns (suppliers, plants).
fn dataset_files(dir: &Path) -> (PathBuf, PathBuf) {
    let ds = synth_dataset(7, 6, 5, 8).unwrap();
    let (s, p) = (dir.join("suppliers.csv"), dir.join("plants.csv"));
    std::fs::write(&s, write_suppliers_csv(&ds)).unwrap();
    std::fs::write(&p, write_plants_csv(&ds)).unwrap();
    (s, p)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transport_table() {
    let o = bioflow(&["tables", "--which", "transport"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("biomass,name,truck,load_tons,unit_cost_thb_per_ton_km\n"));
    assert!(text.contains("rice_straw,rice straw,flatbed10w,6.4885,1.01\n"), "{text}");
    assert!(text.contains("molasses,molasses,tanker,28.5000,0.23\n"));
    assert_eq!(text.lines().count(), 18);
}

#[test]
fn biogas_table() {
    let text = stdout(&bioflow(&["tables", "--which", "biogas"]));
    assert!(text.contains("rice_husk,rice husk,0.019,9.0830\n"), "{text}");
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn other_tables_and_unknown() {
    for which in ["prices", "heat", "density"] {
        let o = bioflow(&["tables", "--which", which]);
        assert!(o.status.success(), "{which}");
        assert!(!stdout(&o).contains('\r'));
    }
    assert!(stdout(&bioflow(&["tables", "--which", "prices"])).contains("molasses,molasses,10410\n"));
    let o = bioflow(&["tables", "--which", "colors"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colors"));
}

#[test]
fn validate_reports_each_problem() {
    let dir = tempfile::tempdir().unwrap();
    let (s, p) = dataset_files(dir.path());
    let o = bioflow(&["validate", "--suppliers", path(&s), "--plants", path(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok: 6 suppliers, 5 biomass types, 8 plants, 12 months"));

    let text = std::fs::read_to_string(&s).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    for row in [1, 3] {
        let cut = lines[row].rfind(',').unwrap();
        lines[row] = format!("{},-5", &lines[row][..cut]);
    }
    std::fs::write(&s, lines.join("\n") + "\n").unwrap();
    let o = bioflow(&["validate", "--suppliers", path(&s), "--plants", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.lines().count() >= 2, "{err}");
    assert!(err.contains("suppliers.csv"), "{err}");

    let missing = dir.path().join("nope.csv");
    let o = bioflow(&["validate", "--suppliers", path(&missing), "--plants", path(&p)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bioflow(&["run", "mincost", "--out", path(&out), "--dump-model"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.json", "biomass_usage.csv", "production.csv", "inventory.csv", "model.lp", "manifest.json"] {
        let bytes = std::fs::read(out.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert!(!bytes.contains(&b'\r'), "{f} has CR");
    }
    let usage = std::fs::read_to_string(out.join("biomass_usage.csv")).unwrap();
    assert!(usage.starts_with("biomass,month,used,available\n"));
    assert!(std::fs::read_to_string(out.join("production.csv")).unwrap().starts_with("plant,kind,month,output\n"));
    assert!(std::fs::read_to_string(out.join("inventory.csv")).unwrap().starts_with("plant,month,tons\n"));

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "Optimal");
    assert_eq!(report["scenario"], "mincost");
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    let argv: Vec<String> = manifest["command"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(&argv[..3], ["bioflow", "run", "mincost"]);

    // The recorded command reproduces the run.
    let again = dir.path().join("again");
    let mut replay: Vec<String> = argv[1..].to_vec();
    let at = replay.iter().position(|a| a == "--out").unwrap();
    replay[at + 1] = path(&again).to_string();
    let args: Vec<&str> = replay.iter().map(String::as_str).collect();
    assert!(bioflow(&args).status.success());
    for f in ["report.json", "biomass_usage.csv", "production.csv", "inventory.csv", "model.lp"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn infeasible_and_iteration_limit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (s, p) = dataset_files(dir.path());
    let config = dir.path().join("config.toml");
    // National targets dwarf the synthetic plants.
    std::fs::write(&config, "demand_source = \"dataset\"\n").unwrap();
    let o = bioflow(&[
        "run", "mincost", "--config", path(&config), "--suppliers", path(&s), "--plants", path(&p),
        "--out", path(&dir.path().join("inf")),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(dir.path().join("inf/report.json").exists());
    assert!(!dir.path().join("inf/production.csv").exists());

    std::fs::write(&config, "[solver]\nmax_iterations = 1\n").unwrap();
    let o = bioflow(&["run", "potential", "--config", path(&config), "--out", path(&dir.path().join("lim"))]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn bad_inputs_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, "availability_factor = 1.5\n").unwrap();
    let out = path(&dir.path().join("o")).to_string();
    assert_eq!(bioflow(&["run", "mincost", "--config", path(&config), "--out", &out]).status.code(), Some(1));
    std::fs::write(&config, "no_such_key = 1\n").unwrap();
    assert_eq!(bioflow(&["run", "mincost", "--config", path(&config), "--out", &out]).status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    assert_eq!(bioflow(&["run", "mincost", "--config", path(&missing), "--out", &out]).status.code(), Some(2));
    assert_eq!(bioflow(&["run", "mincost", "--synth-size", "0,5,8", "--out", &out]).status.code(), Some(1));
}

#[test]
fn distance_matrix_run() {
    let dir = tempfile::tempdir().unwrap();
    let (s, p) = dataset_files(dir.path());
    let ds = synth_dataset(7, 6, 5, 8).unwrap();
    let mut csv = String::from("supplier_id,plant_id,km\n");
    for sup in &ds.suppliers {
        for pl in &ds.plants {
            csv.push_str(&format!("{},{},{}\n", sup.province_id, pl.plant_id, 100));
        }
    }
    let matrix = dir.path().join("distances.csv");
    std::fs::write(&matrix, csv).unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "demand_mode = \"at-least\"\n[demand]\nbiomass_elec_mw = 1.0\nbiogas_elec_mw = 0.1\nethanol_ml_per_day = 0.01\n",
    )
    .unwrap();
    let common = [
        "--config", path(&config), "--suppliers", path(&s), "--plants", path(&p), "--distances", path(&matrix),
    ];
    let o = bioflow(&[&["validate"][..], &common].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("o");
    let o = bioflow(&[&["run", "potential"][..], &common, &["--out", path(&out)]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn every_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    for scenario in ["potential", "mincost", "fullop", "expand"] {
        let out = dir.path().join(scenario);
        let o = bioflow(&["run", scenario, "--out", path(&out)]);
        assert_eq!(o.status.code(), Some(0), "{scenario}: {}", stderr(&o));
        assert!(stdout(&o).starts_with(&format!("{scenario}: Optimal")));
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("expand/report.json")).unwrap()).unwrap();
    assert!(report["report"]["expansion"]["new_plants"].is_array());
}

#[test]
fn help_and_usage() {
    assert!(bioflow(&["--help"]).status.success());
    assert_eq!(bioflow(&["frobnicate"]).status.code(), Some(2));
}
