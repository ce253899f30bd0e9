use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn instance(name: &str) -> PathBuf {
    root().join("instances").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sosfred")).args(args).output().expect("spawn sosfred")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sosfred-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn input_errors_exit_nonzero() {
    let bad = tmp("inadmissible.json");
    std::fs::write(&bad, r#"{"p": 2, "gamma": {"re": 0.6}, "alpha": {"omega": "log(2)"}, "a_plus": [{"k": 0, "expr": "1"}], "a_minus": [{"k": 0, "expr": "1"}]}"#).unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not admissible"));

    let syntax = tmp("syntax.json");
    std::fs::write(&syntax, r#"{"p": 2, "alpha": {"omega": "log(2)"}, "a_plus": [{"k": 0, "expr": "1 + * t"}], "a_minus": [{"k": 0, "expr": "1"}]}"#).unwrap();
    let out = run(&["check", syntax.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));

    assert!(!run(&["check", "/definitely/missing.json"]).status.success());
    assert!(!run(&["suite", "nonsense"]).status.success());
}

#[test]
fn thresholds_override_blocks_claim() {
    let t = tmp("margin.json");
    std::fs::write(&t, r#"{"margin": 2.0, "run_probes": false}"#).unwrap();
    let out = run(&["--thresholds", t.to_str().unwrap(), "check", instance("i1_i1.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    // inf |n| = 1 on every fiber, below the raised margin
    assert_eq!(v["claim"], "no_claim");
    assert_eq!(v["thresholds"]["margin"], 2.0);
    assert!(v["probes"].is_null());
    assert!(!text.contains("not Fredholm"));
    assert_eq!(sosfred::rederive_claim(&v).unwrap(), "no_claim");
}

#[test]
fn symbol_csv_minimum_matches_verdict() {
    let out_csv = tmp("curve.csv");
    let out = run(&["symbol", instance("i1_i1.json").to_str().unwrap(), "--fiber", "inf:m=2:t0=e^0.5", "--out", out_csv.to_str().unwrap(), "--samples", "20001"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&out_csv).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["x", "re_n", "im_n", "abs_n"]);
    let min = rdr.records().map(|r| r.unwrap()[3].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert!((min - 1.0).abs() < 1e-6, "{min}");

    let out = run(&["symbol", instance("i1_i1.json").to_str().unwrap(), "--fiber", "nope", "--out", out_csv.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn symbols_suite_with_instance() {
    let out = run(&["suite", "symbols", instance("li_li.json").to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "symbols");
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"fiber zero: inf |n|"), "{names:?}");
}

#[test]
fn golden_verdict_is_sound() {
    let golden = root().join("../../docs/golden/i1_i1.verdict.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(golden).unwrap()).unwrap();
    assert_eq!(sosfred::rederive_claim(&v).unwrap(), "fredholm");
}

#[test]
fn tampered_verdicts_are_rejected() {
    let golden = root().join("../../docs/golden/i1_i1.verdict.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(golden).unwrap()).unwrap();

    let mut w = v.clone();
    w["claim"] = "left_fredholm".into();
    assert!(sosfred::rederive_claim(&w).is_err());

    let mut w = v.clone();
    w["condition_i"]["operators"][1]["classification"]["verdict"] = "strictly_left_LI".into();
    assert!(sosfred::rederive_claim(&w).is_err());

    let mut w = v.clone();
    w["condition_ii"]["fibers"][3]["inf_estimate"] = 1e-9.into();
    assert!(sosfred::rederive_claim(&w).is_err());

    let mut w = v;
    w["condition_ii"]["pass"] = false.into();
    assert!(sosfred::rederive_claim(&w).is_err());
}
