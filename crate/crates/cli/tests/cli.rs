use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lyocert"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lyocert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn example_reports_n0() {
    let path = tmp("example.json");
    let out = run(&["example", "--grid-m", "256", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["results"]["certificate"]["ladder"]["n0"]["value"], 11);
    assert_eq!(v["results"]["certificate"]["ladder"]["n0"]["formulaId"], "ladder.n0");
    assert!(v["formulas"]["ladder.n0"].is_string());
}

#[test]
fn certify_with_gap_override() {
    let out = run(&["certify", "--config", config("worked_example.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = v["results"]["certificate"]["rStar"]["value"].as_f64().unwrap();
    assert!((r / 1.63e-5 - 1.0).abs() < 0.03, "{r}");
    assert_eq!(v["results"]["gap"]["inputs"][0], "gapOverride");
}

#[test]
fn reports_are_byte_identical() {
    let cfg = config("worked_example.json");
    let a = run(&["certify", "--config", cfg.to_str().unwrap(), "--rigorous"]);
    let b = run(&["certify", "--config", cfg.to_str().unwrap(), "--rigorous"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["results"]["certificate"]["rigorousK"], true);
}

#[test]
fn malformed_config_exits_one_with_path() {
    let path = tmp("bad.json");
    std::fs::write(&path, r#"{"dimension": 2, "matrices": [[1, 0, 0, 1]], "weights": [1], "grid": {"m": "many"}}"#).unwrap();
    let out = run(&["certify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.m"));

    std::fs::write(&path, r#"{"dimension": 2, "matrices": [[1, 0, 0, 1]], "weights": [1], "extra": 1}"#).unwrap();
    let out = run(&["certify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));
}

#[test]
fn missing_config_is_a_validation_error() {
    let out = run(&["certify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_three() {
    // A contour far past the branch point forces an eigenvalue collision.
    let path = tmp("wide.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config("worked_example.json")).unwrap()).unwrap();
    v["contour"]["radius"] = 2.0.into();
    v["grid"]["m"] = 96.into();
    std::fs::write(&path, v.to_string()).unwrap();
    let out = run(&["taylor", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scan_boundary_writes_csv() {
    let csv = tmp("scan.csv");
    let out = run(&["scan-boundary", "--config", config("worked_example.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,p_min,gap,r_star,lower_bound");
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn extend_parses_complex_weights() {
    let out = run(&[
        "extend",
        "--config",
        config("worked_example.json").to_str().unwrap(),
        "--grid-m",
        "256",
        "--z",
        "0.5+0.01i,0.5-0.01i",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let lam = &v["results"]["points"][0]["lambda"];
    assert!((lam["value"].as_f64().unwrap() - 0.472).abs() < 1e-2);
    let bad = run(&["extend", "--config", config("worked_example.json").to_str().unwrap(), "--z", "0.5+i0.1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn chain_and_grassmann_configs_run() {
    let out = run(&["chain", "--config", config("markov_example.json").to_str().unwrap(), "--grid-m", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["results"]["rP"]["value"].as_f64().unwrap() > 0.0);
    let out = run(&["grassmann", "--config", config("gl3_grassmann.json").to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["levels"].as_array().unwrap().len(), 2);
}
