use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn radial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radial")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_exponential() {
    let v = json(&radial(&["classify", "--f", "exp", "--N", "3"]));
    assert_eq!(v["q"], 1.0);
    assert_eq!(v["q_S"], 1.25);
    assert!((v["q_JL"].as_f64().unwrap() - (3.0 - 2.0 * 2f64.sqrt()) / 4.0).abs() < 1e-12);
    assert_eq!(v["k"], 2.0);
    assert_eq!(v["regime"], "Oscillatory");
    assert_eq!(v["tol"], 1e-9);
}

#[test]
fn bifurcate_stable_exponential() {
    let v = json(&radial(&[
        "bifurcate", "--f", "exp", "--N", "10", "--rho-min", "0.01", "--rho-max", "100", "--points", "100",
    ]));
    assert_eq!(v["classification"], "Monotone-consistent");
    assert!((v["mu_star"].as_f64().unwrap() - 16.0).abs() < 1e-6);
    assert!(v.get("samples").is_none());
}

#[test]
fn exit_codes() {
    assert_eq!(radial(&["singular", "--f", "power:p=3", "--N", "3"]).status.code(), Some(3));
    assert_eq!(radial(&["classify", "--f", "bogus", "--N", "3"]).status.code(), Some(1));
    assert_eq!(radial(&["shoot", "--f", "exp", "--N", "3", "--rho", "1", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(radial(&["classify", "--f", "exp", "--N", "3", "--tol", "1e-2"]).status.code(), Some(1));
    assert_eq!(radial(&["shoot", "--f", "exp"]).status.code(), Some(1));
    assert_eq!(radial(&["--help"]).status.code(), Some(0));
    assert_eq!(radial(&["intersect", "--f", "exp", "--N", "3", "--first", "regular:1", "--second", "limit:0", "--hi", "5"]).status.code(), Some(1));
}

#[test]
fn csv_output_has_metadata_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = radial(&[
            "bifurcate", "--f", "exp", "--N", "3", "--rho-min", "0.1", "--rho-max", "10", "--points", "20", "--tol", "1e-8",
            "--format", "csv", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let meta: Value = serde_json::from_slice(&fs::read(dir.path().join(format!("{name}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["tol"], 1e-8);
        assert_eq!(meta["command"], "bifurcate");
        fs::read(path).unwrap()
    };
    let a = run("a.csv");
    assert!(a.starts_with(b"rho,mu,dmu_drho\n"));
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 21);
    assert_eq!(a, run("b.csv"));
}

#[test]
fn shoot_and_singular_agree_on_the_gelfand_zero() {
    let v = json(&radial(&["singular", "--f", "exp", "--N", "3"]));
    assert!((v["r0_star"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-8);
    let s = json(&radial(&["shoot", "--f", "exp", "--N", "3", "--rho", "1", "--zero", "stop"]));
    assert!(s["first_zero"].as_f64().unwrap() > 0.0);
    assert_eq!(s["tol"], 1e-9);
}

#[test]
fn json_to_file_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = radial(&["morse", "--f", "exp", "--N", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
    let v: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    assert_eq!(v["verdict"], "InfiniteIndexConsistent");
    assert_eq!(v["regime_consistent"], true);
}

#[test]
fn verify_writes_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = radial(&["verify", "--suite", "2", "--jobs", "2", "--out", dir.path().to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("PASS"), "{text}");
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report[0]["id"], 2);
    assert_eq!(radial(&["verify", "--suite", "15"]).status.code(), Some(1));
}
