//! End-to-end tests of the command-line interface: flags, exit codes, file
//! formats and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pmclab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn pmclab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("pmclab_test_{}_{}", std::process::id(), name));
    p
}

#[test]
fn interval_prints_the_admissible_range() {
    let out = run(&["interval", "--c3", "0.5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "sin²α ∈ (0.5, 0.888889)");

    let out = run(&["interval", "--c3", "-0.25"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "sin²α ∈ (0.888889, 1]");
}

#[test]
fn interval_rejects_degenerate_constants() {
    let out = run(&["interval", "--c3", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["interval", "--c3", "0.88888888888888889"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_writes_the_exact_csv_header() {
    let out = run(&["family", "--u-span", "0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "u,v,alpha,re_a,im_a,re_mu,im_mu,re_c,im_c,g,K_closed,K_gauss,re_phi1,im_phi1,re_phi2,im_phi2,re_gamma,im_gamma"
    );
    assert!(lines.next().unwrap().split(',').count() == 18);
}

#[test]
fn family_zero_span_is_a_single_row() {
    let out = run(&["family", "--u-span", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2, "header plus one data row");
}

#[test]
fn family_inadmissible_start_exits_3() {
    // sin^2(1.4) ~ 0.97 is outside (0.5, 8/9)
    let out = run(&["family", "--alpha0", "1.4", "--u-span", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn family_output_is_deterministic() {
    let p1 = temp_path("fam1.csv");
    let p2 = temp_path("fam2.csv");
    for p in [&p1, &p2] {
        let out = run(&["family", "--u-span", "0.01", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    std::fs::remove_file(&p1).ok();
    std::fs::remove_file(&p2).ok();
    assert_eq!(a, b);
}

#[test]
fn family_json_format() {
    let out = run(&["family", "--u-span", "0.005", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["header"].as_array().unwrap().len(), 18);
    assert!(value["rows"].as_array().unwrap().len() >= 1);
}

#[test]
fn verify_standard_run_passes() {
    let report_path = temp_path("report.json");
    let out = run(&[
        "verify",
        "--u-span",
        "0.2",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report_path).unwrap();
    std::fs::remove_file(&report_path).ok();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"], "pass");
    assert_eq!(value["residuals"].as_array().unwrap().len(), 16);
}

#[test]
fn verify_negative_control_exits_1_with_report() {
    let report_path = temp_path("control.json");
    let out = run(&[
        "verify",
        "--u-span",
        "0.2",
        "--rho-scale",
        "1.01",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // the report is written even though verification failed
    let text = std::fs::read_to_string(&report_path).unwrap();
    std::fs::remove_file(&report_path).ok();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"], "fail");
}

#[test]
fn verify_tolerance_override_flag() {
    // an absurdly tight override must flip the verdict
    let out = run(&[
        "verify",
        "--u-span",
        "0.2",
        "--tol.y_ode_36",
        "1e-30",
        "--out",
        temp_path("tight.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(temp_path("tight.json")).ok();
    // unknown residual names are usage errors
    let out = run(&["verify", "--tol.bogus_name", "1e-3"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn malformed_config_exits_64() {
    let cfg = temp_path("bad.conf");
    std::fs::write(&cfg, "this is not a key value line\n").unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(out.status.code(), Some(64));

    let out = run(&["verify", "--config", "/nonexistent/pmclab.conf"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn config_file_and_env_var() {
    let cfg = temp_path("good.conf");
    std::fs::write(&cfg, "u-span = 0.01\nc3 = -0.25\n").unwrap();
    // via --config
    let out = run(&["family", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let n_flag = stdout(&out).lines().count();
    // via PMCLAB_CONFIG
    let out = bin()
        .args(["family"])
        .env("PMCLAB_CONFIG", cfg.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), n_flag);
    // flags still override the file
    let out = run(&["family", "--config", cfg.to_str().unwrap(), "--u-span", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 2);
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn sweep_rejects_ranges_crossing_excluded_constants() {
    let out = run(&["sweep", "--c3-min", "-0.5", "--c3-max", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--c3-min", "0.5", "--c3-max", "0.95"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_curvature_scales_exactly_with_b_squared() {
    let a = run(&["sweep", "--c3-min", "0.1", "--c3-max", "0.8", "--steps", "4", "--samples", "5", "--b", "1"]);
    let b = run(&["sweep", "--c3-min", "0.1", "--c3-max", "0.8", "--steps", "4", "--samples", "5", "--b", "2"]);
    assert!(a.status.success() && b.status.success());
    let parse = |out: &Output, col: usize| -> Vec<f64> {
        stdout(out)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
            .collect()
    };
    for col in [2, 3, 4] {
        let ka = parse(&a, col);
        let kb = parse(&b, col);
        for (x, y) in ka.iter().zip(kb.iter()) {
            assert_eq!(*y, 4.0 * *x, "column {col} must scale exactly");
        }
    }
    // every row satisfies the curvature bound with b = 1
    for line in stdout(&a).lines().skip(1) {
        let k: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(k <= -2.0 + 1e-9);
    }
}

#[test]
fn usage_errors_exit_64() {
    let out = run(&["family", "--h", "not-a-number"]);
    assert_eq!(out.status.code(), Some(64));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(64));
}
