use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fillin-lab")).args(args).output().expect("binary runs")
}

fn lab_env(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fillin-lab"))
        .args(args)
        .env("FILLIN_LAB_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_data(dir: &Path, body: &str) -> String {
    let p = dir.join("data.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn schwarzschild_neck_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("neck.json");
    let o = lab(&["neck-schwarzschild", "--n", "3", "--H", "1", "--h", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["m"].as_f64(), Some(0.375));
    assert_eq!(v["result"]["r1"].as_f64(), Some(0.1875));
    assert_eq!(v["result"]["r2"].as_f64(), Some(0.5625));
    assert!(v["tolerances"].as_object().is_some_and(|m| !m.is_empty()));
    assert!(v["grid"].is_object());
}

#[test]
fn theta_closed_prints_zero() {
    let o = lab(&["theta-closed", "--n", "3", "--H", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn nnsc_sweep_changes_sign_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), r#"{"n": 3, "metric": {"kind": "round", "radius": 1.0}, "H": 1.0}"#);
    let o = lab(&["nnsc-test", "--data", &data, "--path", "const", "--sweep", "H", "0.5:4:0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("H,bracket,verdict"));
    let rows: Vec<(f64, f64, String)> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap(), c[2].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 15);
    for (h, bracket, verdict) in &rows {
        let exact = 8.0 * std::f64::consts::PI - 4.0 * std::f64::consts::PI * h;
        assert!((bracket - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        assert_eq!(verdict == "NoNNSCFillIn", *h > 2.0, "H = {h}");
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let args = ["neck-cap", "--lambda", "2", "--theta", "0.3", "--sweep", "theta", "0.05:1:0.05", "--format", "json"];
    let one = lab_env(&args, "1");
    let four = lab_env(&args, "4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["result"].as_array().unwrap().len(), 20);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["neck-isotopy", "--path", "to-round:1.05", "--eps0", "0.1", "--c0", "0.05", "--format", "json"];
    let a = lab(&args);
    let b = lab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn data_with_field_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut field = String::from("x,value\n");
    for i in 0..=20 {
        field.push_str(&format!("{},1.5\n", std::f64::consts::PI * i as f64 / 20.0));
    }
    std::fs::write(dir.path().join("h.csv"), field).unwrap();
    let data = write_data(dir.path(), r#"{"n": 3, "metric": {"kind": "round"}, "H": {"csv": "h.csv"}}"#);
    let o = lab(&["nnsc-test", "--data", &data, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let bracket = v["result"]["report"]["bracket"].as_f64().unwrap();
    assert!((bracket - 2.0 * std::f64::consts::PI).abs() < 1e-9, "bracket {bracket}");
}

#[test]
fn axisym_profile_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut prof = String::from("x,b\n");
    for i in 0..=400 {
        let x = std::f64::consts::PI * i as f64 / 400.0;
        prof.push_str(&format!("{x},{}\n", x.sin()));
    }
    let csv = dir.path().join("prof.csv");
    std::fs::write(&csv, prof).unwrap();
    let spec = format!("profile:{}", csv.display());
    let o = lab(&["lambda1", "--metric", &spec]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lambda: f64 = stdout(&o).trim().parse().unwrap();
    assert!((lambda - 1.0).abs() < 1e-4, "lambda1 = {lambda}");
    let data = write_data(dir.path(), r#"{"n": 3, "metric": {"kind": "axisym", "profile_csv": "prof.csv"}, "H": 1.0}"#);
    let o = lab(&["nnsc-test", "--data", &data, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let bracket = v["result"]["report"]["bracket"].as_f64().unwrap();
    assert!((bracket - 4.0 * std::f64::consts::PI).abs() < 1e-6, "bracket {bracket}");
    let data = write_data(dir.path(), r#"{"n": 3, "metric": {"kind": "axisym", "profile_csv": "prof.csv", "scale": 4.0}, "H": 1.0}"#);
    assert_eq!(lab(&["nnsc-test", "--data", &data]).status.code(), Some(2));
}

#[test]
fn flow_exports_lattice_csv() {
    let o = lab(&["flow", "--u1", "2", "--s-max", "20", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("s,x,u\n"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((last[0] - 20.0).abs() < 1e-9);
    assert!((last[2] - (1.0 - 0.75 / 20.0f64).powf(-0.5)).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(lab(&["theta-closed", "--n", "3"]).status.code(), Some(64));
    assert_eq!(lab(&["theta-closed", "--n", "3", "--H", "1"]).status.code(), Some(2));
    assert_eq!(lab(&["neck-isotopy", "--eps0", "0.1", "--c0", "0.2"]).status.code(), Some(2));
    assert_eq!(lab(&["h0", "--eps", "1", "--s0", "2"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.json");
    assert_eq!(lab(&["h0", "--eps", "0", "--s0", "1", "--out", bad.to_str().unwrap()]).status.code(), Some(74));
    assert_eq!(lab(&["nnsc-test", "--data", bad.to_str().unwrap()]).status.code(), Some(74));
    assert_eq!(lab(&["h0", "--eps", "0", "--s0", "1", "--sweep", "nope", "1:2:1"]).status.code(), Some(64));
}

#[test]
fn validate_filter_runs_only_flow_oracle() {
    let o = lab(&["validate", "--filter", "schwarzschild", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["result"]["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["name"] == "flow-oracle-schwarzschild"));
}

#[test]
fn validate_stress_reports_failures() {
    let o = lab(&["validate", "--filter", "schwarzschild", "--stress", "1e-4"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("1 ")));
}
