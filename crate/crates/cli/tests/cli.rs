use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pea_cli::{ErrorClass, Stage, StageError};
use pea_design::{ComparisonRow, QuadraticObjective, RegionExport, SolveReport};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn pea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pea")).args(args).output().unwrap()
}

fn config() -> String {
    fixtures().join("project.json").to_string_lossy().into_owned()
}

#[test]
fn run_writes_bundle_and_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = pea(&["run", "--config", &config(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["quadratics.json", "problem.json", "regions.json", "regions.svg", "solution.json", "metrics.csv"] {
        assert!(out.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn stage_verbs_print_to_stdout() {
    let o = pea(&["solve", "--config", &config()]);
    assert_eq!(o.status.code(), Some(0));
    let report: SolveReport<f64> = serde_json::from_slice(&o.stdout).unwrap();
    let bundle = pea_cli::build_bundle(&pea_cli::ProjectConfig::load(&fixtures().join("project.json")).unwrap()).unwrap();
    assert_eq!(report, bundle.solution);

    let o = pea(&["quadratics", "--config", &config()]);
    let quads: Vec<QuadraticObjective<f64>> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(quads, bundle.quadratics);

    let o = pea(&["regions", "--config", &config()]);
    let regions: Vec<RegionExport<f64>> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(regions, bundle.regions);
    let o = pea(&["regions", "--config", &config(), "--format", "svg"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("<svg"));

    let o = pea(&["evaluate", "--config", &config()]);
    assert_eq!(String::from_utf8_lossy(&o.stdout), bundle.metrics.to_csv());
    let o = pea(&["evaluate", "--config", &config(), "--format", "json"]);
    let rows: Vec<ComparisonRow<f64>> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), bundle.metrics.rows.len());

    let o = pea(&["ingest", "--config", &config()]);
    let docs: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(docs.len(), 4);
}

#[test]
fn ingest_writes_tasks_to_directory() {
    let out = tempfile::tempdir().unwrap();
    let o = pea(&["ingest", "--config", &config(), "--format", "csv", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(out.path().join("walking.csv")).unwrap();
    let original = std::fs::read_to_string(fixtures().join("tasks/walking.csv")).unwrap();
    assert_eq!(written, original);
}

#[test]
fn tol_flag_overrides_config() {
    let o = pea(&["solve", "--config", &config(), "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let o = pea(&["solve", "--config", &config(), "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"tasks": [], "objective_kind": "rms-effort"}"#).unwrap();
    let o = pea(&["run", "--config", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error: config: config lists no tasks"));

    let o = pea(&["solve", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = pea(&["solve", "--config", &config(), "--format", "svg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = pea(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = pea(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn numerical_failures_map_to_exit_two() {
    for err in [pea_design::Error::Unbounded, pea_design::Error::NotConverged("stalled".into())] {
        let e = StageError::from_core(Stage::Solve, err);
        assert_eq!(e.class, ErrorClass::Numerical);
        assert_eq!(e.exit_code(), 2);
    }
    let e = StageError::from_core(Stage::Ingest, pea_design::Error::MissingColumn("tau_l".into()));
    assert_eq!(e.exit_code(), 1);
}
