use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use algebroid::freealg::FreeError;
use algebroid_cli::CliError;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn algebroid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algebroid")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn passing_checks_exit_zero() {
    let spec = fixture("fx_action_so2.json");
    let out = algebroid(&["check", "--spec", spec.to_str().unwrap(), "--killing", "--cartan"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS cartan") && text.ends_with("verdict: pass\n"), "{text}");
}

#[test]
fn failing_killing_check_exits_one_with_report() {
    let spec = fixture("fx_rho0_n1.json");
    let out = algebroid(&["check", "--spec", spec.to_str().unwrap(), "--killing", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["seed"], 42);
    assert_eq!(report["points"], 100);
    let frame = &report["checks"][0];
    assert_eq!(frame["name"], "killing_frame");
    assert_eq!(frame["max_residual"], 2.0);
    assert_eq!(frame["pass"], false);
    assert!(frame["worst_point"].is_array());
}

#[test]
fn exit_code_matches_verdict_conjunction() {
    let spec = fixture("fx_generalized_so2.json");
    let out = algebroid(&["check", "--spec", spec.to_str().unwrap(), "--generalized", "--killing", "--format", "json"]);
    let report = json(&out);
    let all = report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true);
    assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
}

#[test]
fn default_selection_is_axioms_only() {
    let spec = fixture("fx_so3_sphere.json");
    let out = algebroid(&["check", "--spec", spec.to_str().unwrap(), "--format", "json"]);
    let names: Vec<String> =
        json(&out)["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert!(names.contains(&"anchor_morphism".to_string()) && names.contains(&"jacobi".to_string()));
    assert!(!names.iter().any(|n| n.starts_with("killing") || n == "cartan"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("malformed.json");
    std::fs::write(&bad, "{\"chart\": ").unwrap();
    let out = algebroid(&["check", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));

    let spec = fixture("fx_action_so2.json");
    let s = spec.to_str().unwrap();
    assert_eq!(algebroid(&["check", "--spec", "/nonexistent.json"]).status.code(), Some(2));
    // the structure is absent, so the check cannot run
    assert_eq!(algebroid(&["check", "--spec", s, "--symplectic"]).status.code(), Some(2));
    assert_eq!(algebroid(&["check", "--spec", s, "--koszul"]).status.code(), Some(2));
    assert_eq!(algebroid(&["check", "--spec", s, "--points", "0"]).status.code(), Some(2));
    assert_eq!(algebroid(&["check", "--spec", s, "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(algebroid(&["free", "--spec", s, "--degree", "5"]).status.code(), Some(2));
}

#[test]
fn indeterminacy_maps_to_three() {
    assert_eq!(CliError::from(FreeError::Indeterminate { degree: 2, pivot: 1e-10 }).exit_code(), 3);
    let located = FreeError::NonLocallyFree { point: vec![0.0], residual: 1.0 };
    assert_eq!(CliError::from(located).exit_code(), 3);
    assert_eq!(CliError::from(FreeError::Basis(3)).exit_code(), 2);
}

#[test]
fn free_report_carries_counts_and_profile() {
    let spec = fixture("fx_free_involutive.json");
    let out = algebroid(&["free", "--spec", spec.to_str().unwrap(), "--degree", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let free = &report["free"];
    assert_eq!(free["counts"], serde_json::json!([2, 1, 2]));
    assert_eq!(free["witt"], serde_json::json!([2, 1, 2]));
    assert_eq!(free["basis"][2], "[e2,e1]");
    assert_eq!(free["rank_profile"]["contains_input"], true);
    assert!(free["max_s"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn free_killing_reports_each_degree() {
    let spec = fixture("fx_free_translation.json");
    let out = algebroid(&["free", "--spec", spec.to_str().unwrap(), "--killing", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> =
        json(&out)["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    for k in 1..=3 {
        assert!(names.contains(&format!("free_killing_degree_{k}")), "{names:?}");
    }
    let involutive = fixture("fx_free_involutive.json");
    let out = algebroid(&["free", "--spec", involutive.to_str().unwrap(), "--killing", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn geodesic_writes_csv_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, report) = (dir.path().join("trace.csv"), dir.path().join("report.json"));
    let spec = fixture("fx_nonriem_fol.json");
    let out = algebroid(&[
        "geodesic",
        "--spec",
        spec.to_str().unwrap(),
        "--x0",
        "0,1",
        "--v0",
        "0.7071067811865476,0",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["geodesic"]["monitor"], "raw_span");
    assert!(report["checks"][1]["max_residual"].as_f64().unwrap() >= 1e-2);
    let trace = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "t,x,y,v_x,v_y,energy,orth_1");
    assert_eq!(trace.lines().count(), 1002);
}

#[test]
fn geodesic_sweep_passes_on_flat_foliation() {
    let spec = fixture("fx_foliation_flat.json");
    let out =
        algebroid(&["geodesic", "--spec", spec.to_str().unwrap(), "--starts", "4", "--format", "json", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["points"], 4);
    assert_eq!(report["geodesic"]["monitor"], "transported_frame");
}

#[test]
fn seed_changes_the_sample() {
    let spec = fixture("fx_so3_sphere.json");
    let s = spec.to_str().unwrap();
    let a = algebroid(&["validate", "--spec", s, "--format", "json", "--seed", "1"]).stdout;
    let b = algebroid(&["validate", "--spec", s, "--format", "json", "--seed", "2"]).stdout;
    assert_ne!(a, b);
    assert_eq!(a, algebroid(&["validate", "--spec", s, "--format", "json", "--seed", "1"]).stdout);
}
