use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forge_fixture_writes_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["forge", "--config", fixture("forge_n3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("forge.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r.ends_with("hyperbolic")).count(), 6);
    assert_eq!(rows.iter().filter(|r| r.ends_with("elliptic")).count(), 6);
    let report = read_json(&dir.path().join("forge.json"));
    assert_eq!(report["census_hyperbolic"], 6);
    assert_eq!(report["census_elliptic"], 6);
}

#[test]
fn missing_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cascade", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["exit_code"], 2);
    assert_eq!(report["kind"], "ConfigMissing");
    assert!(dir.path().join("error.json").exists());
}

#[test]
fn malformed_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "map": 3 }"#).unwrap();
    let out = run(dir.path(), &["forge", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let reducible = dir.path().join("reducible.json");
    std::fs::write(&reducible, r#"{ "stages": [{ "p": 2, "n": 4 }] }"#).unwrap();
    let out = run(dir.path(), &["cascade", "--config", reducible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_golden_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["certify", "--theta", "golden", "--qmax", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c: f64 = cert["c"].as_str().unwrap().parse().unwrap();
    let tail: f64 = cert["tail_constant"].as_str().unwrap().parse().unwrap();
    // the sound constant is pinned by q = 1; the tail approaches 1/sqrt(5)
    assert!((c - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((tail - 1.0 / 5f64.sqrt()).abs() / (1.0 / 5f64.sqrt()) < 0.02);
    assert_eq!(read_json(&dir.path().join("certificate.json")), cert);
}

#[test]
fn rational_theta_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["certify", "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["kind"], "RationalDetected");
}

#[test]
fn one_stage_cascade_is_seeded_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = fixture("cascade_one_stage.json");
    for dir in [&a, &b] {
        let out = run(dir.path(), &["--seed", "11", "cascade", "--config", config.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read(a.path().join("ledger.json")).unwrap();
    assert_eq!(text, std::fs::read(b.path().join("ledger.json")).unwrap());
    let ledger = read_json(&a.path().join("ledger.json"));
    assert_eq!(ledger["seed"], 11);
    assert!(ledger["halted"].is_null());
    assert!(ledger["stages"][0]["hyperbolic"].as_u64().unwrap() >= 5);
    assert!(ledger["stages"][0]["elliptic"].as_u64().unwrap() >= 5);
    let orbits = std::fs::read_to_string(a.path().join("orbits.csv")).unwrap();
    assert!(orbits.starts_with("stage,period,winding,x,y,type"));
    let events = std::fs::read_to_string(a.path().join("events.log")).unwrap();
    assert!(events.lines().all(|l| l.starts_with("event=")));
}

#[test]
fn kam_census_and_interval_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["kam", "--config", fixture("kam_golden.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = read_json(&dir.path().join("kam.json"));
    let residual: f64 = curve["residual"].as_str().unwrap().parse().unwrap();
    assert!(residual <= 1e-10);

    let out = run(dir.path(), &["census", "--config", fixture("census_twist.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("census.json"));
    assert_eq!(summary["3"]["hyperbolic"], 3);
    assert_eq!(summary["3"]["elliptic"], 3);

    let out = run(dir.path(), &["--verbose", "interval", "--config", fixture("interval_small.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("event=interval_census k=2")));
    let report = read_json(&dir.path().join("interval.json"));
    for (entry, required) in report.as_array().unwrap().iter().zip([4, 8]) {
        assert!(entry["plateau_points"].as_u64().unwrap() >= required);
    }
}
