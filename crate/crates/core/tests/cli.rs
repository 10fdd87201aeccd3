use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_szego-lab"));
    cmd.env_remove("SZEGO_LAB_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn counterexample_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["counterexample", "--n", "4096", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"], Value::Bool(true));
    assert!((v["mu1_cd"].as_f64().unwrap() - 12.0).abs() < 1e-2);
    assert!(v["gamma2_T"].as_f64().unwrap() > 2.0);
    assert!(v["k_rT"].as_f64().unwrap() < 12.0);
}

#[test]
fn gaussian_sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let summary = dir.path().join("summary.json");
    let config = write(
        dir.path(),
        "sweep.json",
        &format!(
            r#"{{"scenario": "sweep", "weight": {{"kind": "gaussian"}}, "budget": 1.5,
                "range": {{"a_min": -1.6, "a_max": -0.3}}, "resolution": 2000, "steps": 11,
                "out": {:?}}}"#,
            csv.to_str().unwrap()
        ),
    );
    let out = run(&["sweep", "--config", &config, "--summary", summary.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,mu1,dmu1_analytic,dmu1_fd"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    let abar = s["report"]["symmetric_halfwidth"].as_f64().unwrap();
    let right: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] > -abar).collect();
    assert!(right.len() >= 2);
    for w in right.windows(2) {
        assert!(w[1][2] < w[0][2], "mu1 must decrease beyond -abar");
    }
    assert_eq!(s["report"]["sign_ok"], Value::Bool(true));
}

#[test]
fn missing_config_is_input_error() {
    let out = run(&["sweep", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read config"));
}

#[test]
fn bad_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.json", r#"{"scenario": "sweep", "budgett": 1.5}"#);
    let out = run(&["sweep", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budgett"), "{}", stderr(&out));

    let config = write(dir.path(), "kind.json", r#"{"weight": {"kind": "cubic"}}"#);
    let out = run(&["sweep", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("weight.kind"), "{}", stderr(&out));
}

#[test]
fn unattainable_budget_is_input_error() {
    let out = run(&["sweep", "--weight", "gaussian", "--budget", "5.0"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn invalid_thread_count() {
    let out = bin()
        .env("SZEGO_LAB_THREADS", "zero")
        .args(["hl-check", "--random", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("SZEGO_LAB_THREADS"));
}

#[test]
fn random_hardy_littlewood() {
    let out = run(&["hl-check", "--random", "25", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 25);
    assert!(reports.iter().all(|r| r["ok"] == Value::Bool(true)));
}

#[test]
fn rearrange_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "annulus.json",
        r#"{"scenario": "rearrange", "weight": {"kind": "radial_square"}, "dim": 2, "resolution": 4000,
            "cells": [{"r_in": 0.2, "r_out": 0.5, "value": 1.0}, {"r_in": 0.5, "r_out": 0.9, "value": 3.0}]}"#,
    );
    let out = run(&["rearrange", "--config", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let star = v["star"].as_array().unwrap();
    assert_eq!(star[0]["r_in"].as_f64(), Some(0.0));
    assert_eq!(star[0]["value"].as_f64(), Some(3.0));
    assert_eq!(v["bound"]["numerator_cmp"], Value::Bool(true));
}

#[test]
fn radial_and_spectrum_run() {
    let out = run(&[
        "radial",
        "--weight",
        "radial_zero",
        "--dim",
        "2",
        "--radius",
        "1",
        "--n",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,r,f0"));

    let out = run(&[
        "spectrum-1d",
        "--weight",
        "gaussian",
        "--a",
        "-1",
        "--b",
        "1",
        "--problem",
        "neumann",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("index,x,weight,u0"));
}
