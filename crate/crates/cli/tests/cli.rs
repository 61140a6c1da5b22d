use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qising"))
        .args(args)
        .env("QISING_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn verify_net_default_passes() {
    let out = qising(&["verify-net"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    let table = report["result"]["dimension_table"].as_array().unwrap();
    assert_eq!(table.len(), 6);
    assert_eq!(table[1]["type"], "M_2");
    assert_eq!(table[1]["lin_dim"], 4);
    assert_eq!(table[2]["center_dim"], 2);
    assert_eq!(report["result"]["relations"]["symbolic_violations"], 0);
}

#[test]
fn verify_net_rejects_small_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", "[window]\nx_min = 0\nx_max = 1\npadding = 2\n");
    let out = qising(&["verify-net", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of window"));
    assert_eq!(stdout_json(&out)["error"]["kind"], "OutOfWindow");
}

#[test]
fn find_cc_certificate_and_rerun_from_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cc.toml", "seed = 5\n[state]\nlambdas = [1.5, 1.5, 0.5, 0.5]\n");
    let report_path = dir.path().join("report.json");
    let out = qising(&["find-cc", "--config", &cfg, "--json", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    let cert = &report["result"]["certificate"];
    let residuals: Vec<f64> = cert["residuals"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(residuals.iter().all(|r| *r < 1e-8));
    assert!(cert["commutator_norm_b"].as_f64().unwrap() > 1e-3);
    assert_eq!(cert["nontrivial"], true);
    assert_eq!(cert["localization"].as_array().unwrap().len(), 2);
    assert!(cert["reichenbach"]["screen_c"].as_bool().unwrap());

    let again = qising(&["find-cc", "--config", report_path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    let rerun = stdout_json(&again);
    assert_eq!(rerun["config"], report["config"]);
    let rerun_res = rerun["result"]["certificate"]["residuals"].as_array().unwrap();
    for (a, b) in residuals.iter().zip(rerun_res) {
        assert!((a - b.as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn find_cc_uncorrelated_state_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.toml", "[state]\nlambdas = [1.0, 1.0, 1.0, 1.0]\n");
    let out = qising(&["find-cc", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"]["kind"], "NotCorrelated");
}

#[test]
fn u0_sweep_grid() {
    let out = qising(&["u0-sweep", "--parallel", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let result = &report["result"];
    assert_eq!(result["entries"].as_array().unwrap().len(), 36);
    assert!(result["max_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(result["probe"]["exceeds_1e-4"], true);
}

#[test]
fn u0_sweep_parallel_matches_serial() {
    let serial = stdout_json(&qising(&["u0-sweep", "--parallel", "1"]));
    let parallel = stdout_json(&qising(&["u0-sweep", "--parallel", "4"]));
    assert_eq!(serial["result"]["entries"], parallel["result"]["entries"]);
}

#[test]
fn oscillator_csv_follows_minus_sin() {
    let out = qising(&["oscillator"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,psi0_re,psi0_im"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    for r in rows {
        assert!((r[2] + r[0].sin()).abs() < 1e-10);
        assert!(r[1].abs() < 1e-10);
    }
}

#[test]
fn regions_report_first_guess_and_common_past() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("regions.json");
    let out = qising(&["regions", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let diagram = String::from_utf8(out.stdout).unwrap();
    assert!(diagram.contains('a') && diagram.contains('g'));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["result"]["cpast_nonempty"], true);
    assert_eq!(report["result"]["spacelike"], true);
    assert_eq!(report["result"]["first_guess_common_past"]["shift"], 1);
    let svg = qising(&["regions", "--format", "svg"]);
    assert!(String::from_utf8(svg.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn search_commuting_reports_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "[search]\nrestarts = 2\niters = 300\n");
    let out = qising(&["search-commuting", "--config", &cfg, "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 3);
    let r = &report["result"]["report"];
    assert!(r["best_residual"].as_f64().unwrap().is_finite());
    assert!(r["note"].as_str().unwrap().contains("not a proof"));
}

#[test]
fn config_errors_exit_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[window]\nx_min = \"left\"\n");
    let out = qising(&["verify-net", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window.x_min"));

    let cfg = write(dir.path(), "unknown.toml", "[oscillator]\nlevels = 8\n");
    let out = qising(&["oscillator", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));

    let rho = write(dir.path(), "rho.json", "[[[1.0, 0.0]]]");
    let cfg = write(dir.path(), "rho.toml", &format!("[state]\ndensity_file = {rho:?}\n"));
    let out = qising(&["find-cc", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["error"]["kind"], "ShapeMismatch");

    assert_eq!(qising(&["no-such-command"]).status.code(), Some(2));
}
