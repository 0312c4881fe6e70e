use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn quadsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsurf")).args(args).output().expect("run quadsurf")
}

fn config(k: f64, n: usize) -> Value {
    json!({
        "grid": {"box": [-3.0, -3.0, 3.0, 3.0], "n": n},
        "f": {"pieces": [{"shape": {"disk": {"center": [0.0, 0.0], "radius": 0.5}}, "value": 4.0}]},
        "g": {"kind": "constant", "k": k},
        "init": "hull+margin",
        "descent": {"tol_residual": 0.05},
        "certificates": {"eigenvalue": false}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, cfg.to_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json stdout")
}

#[test]
fn oracle_radial_qs() {
    let o = quadsurf(&["oracle", "radial-qs", "--c", "4", "--a", "0.5", "--k", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o), json!({"R": 2.0}));
}

#[test]
fn oracle_radial_poisson_and_bilap() {
    let o = quadsurf(&["oracle", "radial-poisson", "--c", "1", "--a", "1", "--R", "1"]);
    let v = json_out(&o);
    assert!((v["u0"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["du_R"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    let o = quadsurf(&["oracle", "radial-bilap", "--c", "1", "--a", "1", "--R", "1"]);
    assert!((json_out(&o)["g_star"].as_f64().unwrap() - 1.0 / 32.0).abs() < 1e-12);
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(quadsurf(&["oracle", "radial-poisson", "--c", "1", "--a", "1"]).status.code(), Some(1));
    assert_eq!(quadsurf(&["oracle", "radial-qs", "--c", "4", "--a", "-1", "--k", "1"]).status.code(), Some(1));
    assert_eq!(quadsurf(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(0.25, 32);
    cfg["grid"]["cells"] = json!(3);
    let path = write_config(dir.path(), &cfg);
    let o = quadsurf(&["check", "--config", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cells"));
}

#[test]
fn check_reports_all_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &config(0.25, 48));
    let o = quadsurf(&["check", "--config", &path]);
    assert_eq!(o.status.code(), Some(0));
    let reports = json_out(&o);
    let qs = reports.as_array().unwrap().iter().find(|r| r["id"] == "qs_sufficient").unwrap();
    assert_eq!(qs["verdict"], "fires");

    let o = quadsurf(&["check", "--config", &path, "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + reports.as_array().unwrap().len());
}

#[test]
fn check_without_firing_certificate_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &config(2.0, 48));
    assert_eq!(quadsurf(&["check", "--config", &path]).status.code(), Some(3));
}

#[test]
fn solve_qs_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &config(0.25, 64));
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = quadsurf(&["solve-qs", "--config", &path, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        for name in [
            "resolved_config.json",
            "certificate.json",
            "report.json",
            "boundary_0000.csv",
            "boundary_final.csv",
            "phi.bin",
            "phi.json",
            "u.bin",
            "u.json",
        ] {
            assert!(out.join(name).exists(), "missing {name}");
        }
        let resolved: Value = serde_json::from_slice(&std::fs::read(out.join("resolved_config.json")).unwrap()).unwrap();
        assert_eq!(resolved["init"], json!({"hull_margin_cells": 4.0}));
        assert_eq!(resolved["descent"]["cfl"], 0.5);
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(r["status"], "converged");
    assert!((r["mean_radius"].as_f64().unwrap() - 2.0).abs() < 0.2);
}

#[test]
fn solve_qs_without_solution_is_constrained() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &config(2.0, 48));
    let out = dir.path().join("out");
    let o = quadsurf(&["solve-qs", "--config", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["status"], "constrained_at_hull");
    let cert: Value = serde_json::from_slice(&std::fs::read(out.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["verdict"], "fails");
}

#[test]
fn solve_bilap_from_large_g_is_constrained() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &config(1.0, 48));
    let out = dir.path().join("out");
    let o = quadsurf(&["solve-bilap", "--config", &path, "--out", out.to_str().unwrap(), "--g-squared"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let resolved: Value = serde_json::from_slice(&std::fs::read(out.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["g_squared"], true);
    assert!(out.join("v.bin").exists());
}
