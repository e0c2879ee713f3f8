use std::fs;

use tagland_core::harness::{load_scenario, read_csv, run_scenario, Format, SimConfig, CONFIG_ENV};
use tagland_core::harness::telemetry::export_timeseries;
use tagland_core::world::PadType;

const SCENARIO: &str = r#"
schema_version = 1
name = "from_file"
pad_type = "active_ir"
seed = 5
config = "sim.toml"

[start]
distance_m = 10.0
altitude_m = 12.0
bearing_deg = 45.0
yaw_deg = -135.0
"#;

// All environment handling lives in this one test so nothing races on it.
#[test]
fn config_resolution_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scenario.toml"), SCENARIO).unwrap();
    fs::write(dir.path().join("sim.toml"), "dt_s = 0.1\n").unwrap();
    fs::write(dir.path().join("env.toml"), "dt_s = 0.02\n").unwrap();

    let s = load_scenario(&dir.path().join("scenario.toml")).unwrap();
    assert_eq!(s.pad_type, PadType::ActiveIr);
    assert_eq!(s.config.as_deref(), Some(dir.path().join("sim.toml").as_path()));

    std::env::remove_var(CONFIG_ENV);
    assert_eq!(SimConfig::resolve(&s).unwrap().dt_s, 0.1);
    std::env::set_var(CONFIG_ENV, dir.path().join("env.toml"));
    assert_eq!(SimConfig::resolve(&s).unwrap().dt_s, 0.02);
    std::env::set_var(CONFIG_ENV, dir.path().join("missing.toml"));
    assert!(SimConfig::resolve(&s).is_err());
    std::env::remove_var(CONFIG_ENV);

    let mut no_cfg = s.clone();
    no_cfg.config = None;
    assert_eq!(SimConfig::resolve(&no_cfg).unwrap(), SimConfig::default());
}

#[test]
fn bad_config_reports_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.toml");
    fs::write(&path, "dt_s = 0.05\nbogus = 1\n").unwrap();
    let err = SimConfig::load(&path).unwrap_err().to_string();
    assert!(err.contains("sim.toml") && err.contains("bogus"), "{}", err);
    fs::write(&path, "dt_s = 0.5\n").unwrap();
    assert!(SimConfig::load(&path).is_err());
}

#[test]
fn exported_run_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scenario.toml"), SCENARIO.replace("config = \"sim.toml\"\n", "")).unwrap();
    let s = load_scenario(&dir.path().join("scenario.toml")).unwrap();
    let record = run_scenario(&s, &SimConfig::default()).unwrap();
    let csv = dir.path().join("out/run.csv");
    export_timeseries(&record, &csv, Format::Csv).unwrap();
    assert_eq!(read_csv(&csv).unwrap(), record.rows);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), record.rows.len() + 1);
}
