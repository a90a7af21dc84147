use std::process::{Command, Output};

use kacrice::config::RunConfig;

fn kacrice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kacrice")).args(args).env_remove("KACRICE_THREADS").output().expect("spawn kacrice")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_bad_usage() {
    assert_eq!(kacrice(&["--help"]).status.code(), Some(0));
    assert_eq!(kacrice(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kacrice(&["coeffs"]).status.code(), Some(1));
    assert_eq!(kacrice(&["coeffs", "--model", "matern"]).status.code(), Some(1));
    assert_eq!(kacrice(&["k2", "--model", "rwm", "--r", "0.5:0.1"]).status.code(), Some(1));
}

#[test]
fn coeffs_catalog() {
    let o = kacrice(&["coeffs", "--model", "rwm"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "model,g2,g4,g6,g8,slack,degenerate,length_scale,warnings");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "rwm");
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.25);

    let o = kacrice(&["coeffs", "--model", "bf", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["g4"], 0.5);
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w == "warn_b_sign"));
}

#[test]
fn coeffs_admissibility() {
    let o = kacrice(&["coeffs", "--model", "poly:1,0.4,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("degenerate"));
    let o = kacrice(&["coeffs", "--model", "poly:1,0.3,0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kacrice:"));
}

#[test]
fn k2_is_deterministic_across_thread_counts() {
    let args = ["k2", "--model", "bf", "--r", "0.05:0.3:3", "--samples", "2e4"];
    let a = kacrice(&[&["--threads", "1"][..], &args].concat());
    let b = kacrice(&[&["--threads", "3"][..], &args].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.contains("bf,asymptote,0,0.116995625301"));
    assert!(out.contains("bf,limit,0,"));
}

#[test]
fn k2_tolerance_exit_code() {
    let o = kacrice(&["k2", "--model", "rwm", "--r", "0.1:0.1:1", "--samples", "1000", "--tolerance", "1e-9"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn k2_json_records_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k2.json");
    let o = kacrice(&["k2", "--model", "rwm", "--r", "0.1:0.2:2", "--samples", "1e4", "--seed", "9", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let config = RunConfig::from_json(&v["config"].to_string()).unwrap();
    assert_eq!(config.seed, 9);
    assert_eq!(config.samples, 10_000);
    assert_eq!(config.r_grid.unwrap().points().len(), 2);
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
}

#[test]
fn typed_k2_reports_a_fit() {
    let o = kacrice(&["k2", "--model", "bf", "--r", "0.05:0.4:5", "--log", "--samples", "2e4", "--typed", "min,min"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# fit: decay exponent"));
}

#[test]
fn simulate_rejects_polynomial_models() {
    let o = kacrice(&["simulate", "--model", "poly:1,0.5,0.2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_small_budget_exit_code() {
    let o = kacrice(&["simulate", "--model", "bf", "--n", "2", "--mode-budget", "64"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_writes_points() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.csv");
    let o = kacrice(&["simulate", "--model", "rwm", "--L", "15", "--n", "3", "--bins", "0.2:1.0:4", "--k2-samples", "2e3", "--points-out", points.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("r_lo,r_hi,k2_hat,std_err,n_pairs,k2_analytic,ratio,ratio_se"));
    assert!(out.contains("# PASS morse"));
    let pts = std::fs::read_to_string(&points).unwrap();
    assert!(pts.starts_with("sample_id,x,y,type,hess_det,hess_trace"));
    assert!(pts.lines().count() > 100);
}

#[test]
fn validate_passes_and_detects_fault() {
    let o = kacrice(&["validate", "--only", "af,series,sigma,det,delta,eigen,bc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = kacrice(&["validate", "--only", "sigma,delta", "--inject-fault", "gamma2"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",FAIL,")));

    assert_eq!(kacrice(&["validate", "--only", "nonsense"]).status.code(), Some(1));
}
