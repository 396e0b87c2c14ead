use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affine-walk"))
        .args(args)
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn density_exact_dp() {
    let v = json(&[
        "density", "--rank", "2", "--q", "2", "--n", "2", "--x", "0,0", "--method", "dp",
    ]);
    assert_eq!(v["density"], "1/14");
    assert_eq!(v["numerator"], "1");
    assert_eq!(v["denominator"], "14");
    assert_eq!(v["exact"], true);
}

#[test]
fn density_fourier_at_time_zero() {
    let v = json(&[
        "density", "--rank", "2", "--q", "2", "--n", "0", "--x", "0,0", "--method", "fourier",
    ]);
    assert!((v["density"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn density_tree_parity() {
    let v = json(&["density", "--rank", "1", "--q", "2", "--n", "3", "--x", "2"]);
    assert_eq!(v["density"], "0");
    assert!(v["log_density"].is_null());
}

#[test]
fn weighted_density_matches_between_methods() {
    let dp = json(&[
        "density", "--c1", "1/3", "--n", "8", "--x", "2,1", "--method", "dp",
    ]);
    let four = json(&[
        "density", "--c1", "1/3", "--n", "8", "--x", "2,1", "--method", "fourier",
    ]);
    let a = dp["log_density"].as_f64().unwrap();
    let b = four["log_density"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-7);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        run(&["density", "--rank", "2", "--n", "3", "--x", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["density", "--rank", "9", "--n", "3", "--x", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["density", "--c1", "1/0", "--n", "3", "--x", "1,0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn empty_sweep_is_header_only() {
    let out = run(&["sweep", "--region", "rank2-full", "--nmax", "1"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,x1,x2,|x|,d,log_p_oracle,log_estimate,ratio,regime\n"
    );
}

#[test]
fn sweep_rows_and_determinism() {
    let a = run(&[
        "sweep",
        "--region",
        "rank2-full",
        "--nmax",
        "20",
        "--threads",
        "1",
    ]);
    let b = run(&["sweep", "--region", "rank2-full", "--nmax", "20"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cells: usize = (2..=20).map(|n| (n + 1) * (n + 2) / 2).sum();
    assert_eq!(lines.len(), 1 + cells + 1);
    assert!(lines.last().unwrap().starts_with("summary,"));
}

#[test]
fn verify_table_and_plancherel() {
    let v = json(&["verify", "table", "--rank", "2", "--q", "2"]);
    assert_eq!(v["passed"], true);
    let v = json(&["verify", "plancherel", "--rank", "3", "--q", "2"]);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_identities_rank_two() {
    let v = json(&["verify", "identities", "--rank", "2"]);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() > 300);
}

#[test]
fn phase_closed_form_point() {
    let v = json(&[
        "phase",
        "--delta",
        "0.21428571428571427,0.21428571428571427",
    ]);
    let s = v["s_weight"].as_array().unwrap();
    for c in s {
        assert!((c.as_f64().unwrap() - 2f64.ln()).abs() < 1e-10);
    }
    assert!((v["phi"].as_f64().unwrap() + 0.1429124).abs() < 1e-6);
}
