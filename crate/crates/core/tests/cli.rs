//! End-to-end runs of the `gyre` binary.

use gyre::geometry::parse_csv_curve;
use std::path::Path;
use std::process::{Command, Output};

fn gyre(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyre")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn trace_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["trace", "--family", "T", "--r-min", "-0.9", "--r-max", "0.9", "--step", "0.05"];
    let a = gyre(dir.path(), &[&args[..], &["--out", "a.csv"]].concat());
    let b = gyre(dir.path(), &[&args[..], &["--out", "b.csv"]].concat());
    assert!(a.status.success() && b.status.success());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let curve = parse_csv_curve(&a).unwrap();
    assert_eq!(curve.len(), 37);
    assert!(curve.iter().all(|p| p.residual.abs() < 1e-9));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"family": "R", "r_min": -0.5, "r_max": 0.0, "step": 0.25}"#).unwrap();
    let out = gyre(dir.path(), &["--config", "c.json", "trace", "--out", "r.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = parse_csv_curve(&std::fs::read_to_string(dir.path().join("r.csv")).unwrap()).unwrap();
    assert_eq!(curve.len(), 3);
    assert!((curve[0].im_tau - 0.781701).abs() < 1e-6);
}

#[test]
fn meshes_and_svg_are_written() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["catenoid", "--family", "R", "--nu", "24", "--nv", "6", "--out", "c.obj"][..],
        &["surface", "--family", "T", "--re", "0.2", "--nu", "16", "--nv", "6", "--unit", "--out", "u.obj"],
        &["flat", "--tau", "0+1.2i", "--samples", "32", "--out", "f.svg"],
    ] {
        let out = gyre(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let obj = std::fs::read_to_string(dir.path().join("c.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")) && obj.lines().any(|l| l.starts_with("f ")));
    assert!(std::fs::read_to_string(dir.path().join("f.svg")).unwrap().contains("<svg"));
    assert!(dir.path().join("u.obj").exists());
}

#[test]
fn bad_usage_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gyre(dir.path(), &["trace", "--step", "abc"]).status.code(), Some(1));
    // the asymptotics suite includes the sign check near tau = 1, which fails
    assert_eq!(gyre(dir.path(), &["validate", "--suite", "asymptotics"]).status.code(), Some(2));
    let v = gyre(dir.path(), &["validate", "--suite", "identities"]);
    assert_eq!(v.status.code(), Some(0));
}
