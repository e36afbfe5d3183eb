use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatial-irv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["zone", "--dist", "gauss"]).status.code(), Some(1));
    assert_eq!(run(&["density", "--rule", "irv", "--k", "4"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--candidates", "0.2,0.2"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--candidates", "0.2,1.5"]).status.code(), Some(1));
}

#[test]
fn simulate_fixed_profile() {
    let v = json_stdout(&run(&["simulate", "--candidates", "0.2,0.3,0.4,0.85"]));
    assert_eq!(v["outcomes"]["plurality"]["winner_position"], 0.85);
    assert_eq!(v["outcomes"]["irv"]["winner_position"], 0.4);
    assert_eq!(v["outcomes"]["irv"]["elimination_order"], serde_json::json!([1, 0, 3]));
}

#[test]
fn tie_rule_flag() {
    let args = ["simulate", "--rule", "irv", "--candidates", "0.01,0.2,0.5,0.8,1.0"];
    let left = json_stdout(&run(&[&args[..], &["--tie-rule", "left"]].concat()));
    let right = json_stdout(&run(&[&args[..], &["--tie-rule", "right"]].concat()));
    assert_eq!(left["outcomes"]["irv"]["winner_position"], 0.8);
    assert_eq!(right["outcomes"]["irv"]["winner_position"], 0.2);
    let err = run(&[&args[..], &["--tie-rule", "error"]].concat());
    assert_eq!(err.status.code(), Some(1));
}

#[test]
fn zone_fields() {
    let v = json_stdout(&run(&["zone", "--dist", "beta:2"]));
    assert_eq!(v["kind"], "ModerateInterval");
    assert_eq!(v["regime"], "Moderate");
    assert_eq!(v["verified"], true);
    assert!((v["c"].as_f64().unwrap() - 0.259_149_014_744_314_7).abs() < 1e-9);
    let hyper = json_stdout(&run(&["zone", "--dist", "beta:0.3"]));
    assert_eq!(hyper["kind"], "ExtremePair");
    assert_eq!(run(&["zone", "--dist", "beta:0.3", "--method", "numeric"]).status.code(), Some(1));
}

#[test]
fn density_csv() {
    let out = run(&["density", "--rule", "plurality", "--grid", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,density");
    assert_eq!(lines.len(), 6);
    let tail = run(&["density", "--rule", "irv", "--k", "6", "--tail", "--grid", "3"]);
    assert!(tail.status.success());
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn manifest_beside_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hist.csv");
    let status = run(&[
        "simulate", "--k", "3", "--trials", "500", "--seed", "7", "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(
        files_in(dir.path()),
        ["hist.csv", "hist.csv.density.csv", "hist.csv.manifest.json"]
    );
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hist.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["config"]["master_seed"], 7);
    assert_eq!(m["config"]["trials"], 500);
    assert!(m["duration_secs"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("rule,k,trial,winner_position\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 500);
}

#[test]
fn output_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("s{threads}.csv"));
        let o = run(&[
            "scatter", "--k", "3,4", "--trials", "2000", "--seed", "11", "--threads", threads,
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        bodies.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let g1 = run(&["gumbel", "--k", "200", "--trials", "300", "--threads", "1"]);
    let g4 = run(&["gumbel", "--k", "200", "--trials", "300", "--threads", "4"]);
    assert_eq!(g1.stdout, g4.stdout);
}

#[test]
fn gumbel_modes() {
    for mode in ["share", "maxgap"] {
        let o = run(&["gumbel", "--k", "100", "--trials", "50", "--mode", mode, "--format", "json"]);
        let v = json_stdout(&o);
        assert_eq!(v["statistics"].as_array().unwrap().len(), 50);
        assert!(v["summary"]["ks"].as_f64().unwrap() <= 1.0);
    }
    let o = run(&["gumbel", "--k", "50", "--trials", "100", "--mode", "circle"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("k,trials,disagreements,rate\n"));
}

#[test]
fn betasweep_json() {
    let v = json_stdout(&run(&[
        "betasweep", "--alphas", "0.3,2", "--k", "10", "--trials", "200", "--format", "json",
    ]));
    let s = v["summaries"].as_array().unwrap();
    assert_eq!(s.len(), 2);
    assert!(s.iter().all(|x| x["irv_violations"] == 0));
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 12);

    let bad = run(&["verify", "--inject-fault", "shifted-shares"]);
    assert_eq!(bad.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    let zone = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "uniform_zone").unwrap();
    assert_eq!(zone["passed"], false);
}
