use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dyncl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncl")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dyncl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"{"family": "exp_exp", "gamma": 3.0, "zeta": 0.5, "n": 10, "scheme": "poisson", "xi": 5.0, "k": 2000, "runs": 6, "seed": 3, "emit_qq": true, "emit_hist": true}"#;

#[test]
fn every_preset_parses() {
    let mut seen = 0;
    for dir in [configs_dir(), configs_dir().join("paper")] {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.extension().is_some_and(|e| e == "json") {
                let v: serde_json::Value = serde_json::from_str(&ok(&["moments", "--config", p.to_str().unwrap()])).unwrap();
                assert!(v["s"].as_f64().unwrap() > 0.0 && v["rho1"].as_f64().unwrap() > 0.0, "{}", p.display());
                seen += 1;
            }
        }
    }
    assert_eq!(seen, 14);
}

#[test]
fn moments_of_reference_model() {
    let p = configs_dir().join("expexp_poisson.json");
    let v: serde_json::Value = serde_json::from_str(&ok(&["moments", "--config", p.to_str().unwrap()])).unwrap();
    assert!((v["s"].as_f64().unwrap() - 33.967).abs() < 1e-3);
    let halved: serde_json::Value =
        serde_json::from_str(&ok(&["moments", "--config", p.to_str().unwrap(), "--divisor", "2m"])).unwrap();
    assert!((halved["s"].as_f64().unwrap() - 33.967 / 2.0).abs() < 1e-3);
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "c.json", SMALL);
    let csv = ok(&["simulate", "--config", &cfg]);
    assert!(csv.starts_with("k,time,count\n1,"));
    assert_eq!(csv.lines().count(), 2001);
    let bin = dir.path().join("s.bin");
    ok(&["simulate", "--config", &cfg, "--out", bin.to_str().unwrap(), "--format", "bin"]);
    let a: serde_json::Value = serde_json::from_str(&ok(&["estimate", "--config", &cfg, "--series", bin.to_str().unwrap()])).unwrap();
    let csv_path = small_config(dir.path(), "s.csv", &csv);
    let b: serde_json::Value = serde_json::from_str(&ok(&["estimate", "--config", &cfg, "--series", &csv_path])).unwrap();
    assert_eq!(a, b);
    for key in ["theta_hat", "gamma_hat", "zeta_hat", "s_hat", "converged", "cov_11"] {
        assert!(a.get(key).is_some(), "missing {key}");
    }
    assert!(!dyncl(&["simulate", "--config", &cfg, "--format", "bin"]).status.success());
}

#[test]
fn experiment_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let text = ok(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap(), "--runs", "4", "--workers", "2"]);
    assert!(text.starts_with("runs 4 "));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 5);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["runs"], 4);
    assert_eq!(summary["config"]["seed"], 3);
}

#[test]
fn seed_override_changes_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "c.json", SMALL);
    let a = ok(&["simulate", "--config", &cfg]);
    assert_eq!(a, ok(&["simulate", "--config", &cfg]));
    assert_ne!(a, ok(&["simulate", "--config", &cfg, "--seed", "4"]));
}

#[test]
fn kstest_writes_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "c.json", SMALL);
    let out = dir.path().join("eq");
    let text = ok(&["kstest", "--config", &cfg, "--config-b", &cfg, "--runs", "8", "--out", out.to_str().unwrap()]);
    assert!(text.contains("do not reject"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("equality.json")).unwrap()).unwrap();
    assert_eq!(v["ks_s_hat"]["statistic"], 0.0);
    ok(&["kstest", "--config", &cfg, "--config-b", &cfg, "--seed-b", "9", "--runs", "8"]);
}

#[test]
fn bad_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let typo = small_config(dir.path(), "t.json", &SMALL.replace("\"seed\"", "\"sed\""));
    let out = dyncl(&["moments", "--config", &typo]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sed"));
    let cfg = small_config(dir.path(), "c.json", SMALL);
    assert!(!dyncl(&["experiment", "--config", &cfg, "--runs", "0"]).status.success());
    assert!(!dyncl(&["moments", "--config", "/nonexistent.json"]).status.success());
}
