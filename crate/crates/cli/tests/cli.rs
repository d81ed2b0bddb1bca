use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractrunc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("FRACTRUNC_OUT")
        .output()
        .expect("binary runs")
}

fn error_record(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).expect("stderr holds one JSON record")
}

#[test]
fn malformed_params_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--alpha", "0.6", "profile"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "constraint_violation");
}

#[test]
fn unwritable_output_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = run(&blocker.join("sub"), &["profile"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_record(&o)["exit_code"], 4);
}

#[test]
fn bad_config_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"params": {"n": 1, "s": 1.5, "p": 2, "alpha": 0}}"#).unwrap();
    let o = run(dir.path(), &["--config", cfg.to_str().unwrap(), "profile"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn truncate_reports_support_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["truncate", "--eps", "0.05", "--delta", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("truncate.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["support_composition"], true);
    let spec: fractrunc::Spec = serde_json::from_value(v["spec"].clone()).unwrap();
    assert!(spec.m <= 2.0);
    assert_eq!(serde_json::to_value(spec).unwrap(), v["spec"]);
}

#[test]
fn format_flag_limits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--format", "csv", "profile"]).status.success());
    assert!(dir.path().join("profile.csv").exists());
    assert!(!dir.path().join("profile.json").exists());
}

#[test]
fn st1_default_plan_passes_with_plots() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--theorem", "st1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("st1 q=")).count(), 2);
    assert!(stdout.contains("verdict: consistent") || stdout.contains("verdict: bound_satisfied"));
    let svg = std::fs::read_to_string(dir.path().join("verify_st1_q_1_6.svg")).unwrap();
    assert_eq!(svg.matches("class=\"guide\"").count(), 1);
}

#[test]
fn sweep_csv_independent_of_workers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let plan = a.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"params": {"n": 1, "s": 0.3, "p": 2, "alpha": 0}, "q_list": [1.6, 2],
            "sweep_mode": {"mode": "fix_ratio", "ratio": 0.25}, "eps_values": [0.5, 0.1, 0.02]}"#,
    )
    .unwrap();
    let cfg = plan.to_str().unwrap();
    assert!(run(a.path(), &["--workers", "1", "--config", cfg, "sweep"]).status.success());
    assert!(run(b.path(), &["--workers", "3", "--config", cfg, "sweep"]).status.success());
    let (x, y) = (std::fs::read(a.path().join("sweep.csv")).unwrap(), std::fs::read(b.path().join("sweep.csv")).unwrap());
    assert_eq!(x, y);
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 7);
}

#[test]
fn short_sweep_is_reported_violated() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"params": {"n": 1, "s": 0.3, "p": 2, "alpha": 0}, "q_list": [1.6],
            "sweep_mode": {"mode": "fix_delta_sweep_eps"}, "eps_values": [0.25, 0.125, 0.0625, 0.03125]}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["--format", "json", "--config", plan.to_str().unwrap(), "verify", "--theorem", "st1"]);
    assert_eq!(o.status.code(), Some(3));
}
