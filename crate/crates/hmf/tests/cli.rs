use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

const MB: &str = "schema = 1\n[profile]\nfamily = \"maxwell_boltzmann\"\nA = 0.05\nbeta = 2.0\n";

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
fn hmf(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("hmf").chain(args.iter().copied());
    let code = hmf::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn error_object(stderr: &str) -> Value {
    let line = stderr.lines().find(|l| l.starts_with('{')).expect("JSON error line");
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

#[test]
fn criterion_reports_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MB);
    let (code, out, err) = hmf(&["--config", &cfg, "criterion"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let (q, e) = (v["kappa0_quadrature"].as_f64().unwrap(), v["kappa0_elliptic"].as_f64().unwrap());
    assert!((q - e).abs() < 1e-6 * q);
    assert_eq!(v["stable"], Value::Bool(true));
}

#[test]
fn report_gate_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MB);
    let out_dir = dir.path().join("run");
    let (code, out, err) = hmf(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "report"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let kappa0 = v["kappa0"].as_f64().unwrap();
    let j2 = v["J_second_m0"].as_f64().unwrap();
    assert!((v["consistency_residual"].as_f64().unwrap() - (j2 - (1.0 - kappa0)).abs()).abs() < 1e-15);
    assert!(v["K0"].as_f64().unwrap() > 0.0);
    assert!(v["note"].as_str().unwrap().contains("non-constructive"));
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk, v);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MB);
    let a = hmf(&["--config", &cfg, "--threads", "2", "--format", "csv", "--scan", "m=0.5:2:7", "reduced"]);
    let b = hmf(&["--config", &cfg, "--threads", "2", "--format", "csv", "--scan", "m=0.5:2:7", "reduced"]);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a.1, b.1);
    assert!(a.1.starts_with("m,J,J_prime,J_second\n"));
    assert_eq!(a.1.lines().count(), 8);
}

#[test]
fn short_simulation_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{MB}[sim]\nn_theta = 32\nn_v = 33\nt_end = 1.0\ndiag_every = 5\n");
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("sim");
    let (code, out, err) = hmf(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "simulate"]);
    assert_eq!(code, 0, "{err}");
    let summary: Value = serde_json::from_str(&out).unwrap();
    assert!(summary["summary"]["energy_drift"].as_f64().is_some());
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,mass,H,momentum,casimir2,Mx,My,theta_f,L1dist,clipped_mass\n"));
    assert_eq!(csv.lines().count(), 1 + 20 / 5 + 1);
    let snapshot = fs::File::open(out_dir.join("final_state.bin")).unwrap();
    let g = hmf::rearrange::GriddedDistribution::read_binary(snapshot).unwrap();
    assert_eq!((g.n_theta(), g.n_v()), (32, 33));
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{MB}[criterion]\npanels = 4\n"));
    let (code, _, err) = hmf(&["--config", &cfg, "criterion"]);
    assert_eq!(code, 2);
    let e = error_object(&err);
    assert_eq!(e["kind"], "config");
    assert!(e["message"].as_str().unwrap().contains("panels"));
}

#[test]
fn homogeneous_only_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MB.replace("A = 0.05", "A = 0.001").replace("beta = 2.0", "beta = 0.1"));
    let (code, _, err) = hmf(&["--config", &cfg, "steady-state"]);
    assert_eq!(code, 2);
    assert_eq!(error_object(&err)["kind"], "homogeneous_only");
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = hmf(&["criterion"]);
    assert_eq!(code, 2, "missing --config");
    assert!(err.contains("--config"));
    let (code, _, err) = hmf(&["--scan", "A=1:2", "action-table"]);
    assert_eq!(code, 2);
    assert_eq!(error_object(&err)["kind"], "usage");
}

#[test]
fn action_table_needs_no_config() {
    let (code, out, err) = hmf(&["--format", "csv", "action-table", "--m", "1.0", "--range", "-0.5:2:6"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "e,alpha1,alpha1_prime,b,b_prime");
    assert_eq!(lines.count(), 6);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MB);
    let bin = env!("CARGO_BIN_EXE_hmf");
    let ok = Command::new(bin).args(["--config", &cfg, "steady-state"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!((v["m0"].as_f64().unwrap() - 1.1336052).abs() < 1e-6);
    let bad = Command::new(bin).args(["--config", "/nonexistent/x.toml", "criterion"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
