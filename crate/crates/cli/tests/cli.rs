use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hlpush(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlpush"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("HLPUSH_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Data rows of a CSV, skipping `#` comments and the header.
fn rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["simulate", "--t", "20", "--replicas", "50", "--seed", "9"];
    let a = hlpush(dir.path(), &[&args[..], &["--output", "a.csv"]].concat());
    let b = hlpush(dir.path(), &[&args[..], &["--output", "b.csv"]].concat());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let (ra, rb) = (rows(&dir.path().join("a.csv")), rows(&dir.path().join("b.csv")));
    assert_eq!(ra.len(), 50);
    assert_eq!(ra, rb);
}

#[test]
fn simulate_with_no_replicas_writes_only_the_header() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["simulate", "--t", "5", "--replicas", "0"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["seed,replica,t,x,N,boundary_touched"]);
    assert!(text.starts_with("# hlpush "));
}

#[test]
fn missing_time_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["simulate"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`t`"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"t": 3.0, "replicas": 7, "seed": 4, "output": "from_file.csv"}"#).unwrap();
    let out = hlpush(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate", "--replicas", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("from_file.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(r#""replicas":3"#), "{text}");
    assert!(text.contains(r#""t":3.0"#), "{text}");
    assert_eq!(rows(&path).len(), 3);
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"t": 1.0, "temperature": 2}"#).unwrap();
    let out = hlpush(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("temperature"));
}

#[test]
fn out_of_range_parameter_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["simulate", "--t", "1", "--b", "1.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn tabulate_gauss_at_zero() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["tabulate", "--dist", "gauss", "--grid", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("tabulate_gauss.csv"));
    assert_eq!(r.len(), 1);
    let value: f64 = r[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 0.5).abs() < 1e-6, "{value}");
}

#[test]
fn crosscheck_single_particle_transition() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["crosscheck", "--kind", "transition", "--x0", "2", "--x1", "5", "--t", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("crosscheck_transition.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["report"]["discrepancy"].as_f64().unwrap() < 1e-8);
}

#[test]
fn validate_single_criterion() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["validate", "--only", "2"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS criterion 2"), "{stdout}");
    assert!(dir.path().join("validation.json").exists());
}

#[test]
fn unknown_criterion_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = hlpush(dir.path(), &["validate", "--only", "12"]);
    assert_eq!(code(&out), 2);
}
