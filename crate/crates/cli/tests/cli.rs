//! End-to-end runs of the `sn-bound` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sn_bound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sn-bound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run_id_line(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .next()
        .unwrap()
        .trim_start_matches("# run_id: ")
        .to_string()
}

/// Data rows of a CSV written by the binary, without the comment and header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn solve_ground_state_writes_consistent_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gs");
    let o = sn_bound(&[
        "solve",
        "--dim",
        "2",
        "--m",
        "0",
        "--nodes",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = json_file(&out.join("manifest.json"));
    let diag = json_file(&out.join("diagnostics.json"));
    assert_eq!(diag["all_pass"], Value::Bool(true));
    let id = manifest["run_id"].as_str().unwrap();
    assert_eq!(diag["run_id"].as_str().unwrap(), id);
    assert_eq!(run_id_line(&out.join("profile.csv")), id);
    assert!(!out.join("physical.csv").exists());
    let header = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert_eq!(header.lines().nth(1), Some("r,u,du,V,dV"));
    for key in [
        "rel_tol",
        "abs_tol",
        "r_max",
        "escape_factor",
        "eps_origin",
        "max_steps",
        "bis_tol",
    ] {
        assert!(manifest["tolerances"].get(key).is_some(), "{key}");
    }
    let profile = rows(&out.join("profile.csv"));
    assert!(profile.iter().all(|r| f(&r[1]) > 0.0));
    assert_eq!(manifest["jobs"][0]["zeros"], 0);
}

#[test]
fn one_dimensional_odd_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("odd");
    let o = sn_bound(&[
        "solve",
        "--dim",
        "1",
        "--parity",
        "1",
        "--nodes",
        "0",
        "--gamma",
        "1",
        "--sigma",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = rows(&out.join("profile.csv"));
    assert!(profile.iter().all(|r| f(&r[1]) > 0.0));
    // phi = x u(x) on the half line: it vanishes linearly at the origin, so
    // its odd continuation is smooth.
    let phys = rows(&out.join("physical.csv"));
    let (r0, p0) = (f(&phys[0][0]), f(&phys[0][1]));
    let (r1, p1) = (f(&phys[1][0]), f(&phys[1][1]));
    assert!(p0 > 0.0 && (p0 / r0 / (p1 / r1) - 1.0).abs() < 1e-3);
}

#[test]
fn manifest_frequency_is_one_plus_potential_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phys");
    let o = sn_bound(&[
        "solve",
        "--dim",
        "2",
        "--m",
        "0",
        "--nodes",
        "0",
        "--gamma",
        "1",
        "--sigma",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json_file(&out.join("manifest.json"));
    let ph = &m["physical"];
    let omega = ph["omega"].as_f64().unwrap();
    let v0 = ph["v_origin"].as_f64().unwrap();
    assert!((omega - (1.0 + v0)).abs() < 1e-12);
    assert!(ph["E"].as_f64().unwrap().is_finite());
    assert!(ph["N"].as_f64().unwrap() > 0.0);
    assert_eq!(run_id_line(&out.join("physical.csv")), m["run_id"].as_str().unwrap());
}

#[test]
fn scan_is_ordered_decreasing_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |out: &Path, jobs: &str| {
        sn_bound(&[
            "scan",
            "--dim",
            "2",
            "--m-min",
            "0",
            "--m-max",
            "1.5",
            "--m-step",
            "0.5",
            "--nodes-max",
            "2",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ])
    };
    assert_eq!(args(&a, "1").status.code(), Some(0));
    assert_eq!(args(&b, "2").status.code(), Some(0));
    let ca = std::fs::read(a.join("scan.csv")).unwrap();
    let cb = std::fs::read(b.join("scan.csv")).unwrap();
    assert_eq!(ca, cb);
    let table = rows(&a.join("scan.csv"));
    assert_eq!(table.len(), 12);
    for (k, row) in table.iter().enumerate() {
        assert_eq!(f(&row[0]), 0.5 * (k / 3) as f64);
        assert_eq!(row[1], (k % 3).to_string());
        assert_eq!(row[3], "ok");
        if k % 3 > 0 {
            assert!(f(&row[2]) < f(&table[k - 1][2]));
        }
    }
    let m = json_file(&a.join("manifest.json"));
    assert_eq!(m["jobs"].as_array().unwrap().len(), 12);
}

#[test]
fn scan_rejects_zero_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = sn_bound(&[
        "scan",
        "--m-min",
        "0",
        "--m-max",
        "1",
        "--m-step",
        "0",
        "--nodes-max",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--m-step"));
}

#[test]
fn check_stored_profile_and_escaping_start() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gs");
    let o = sn_bound(&[
        "solve",
        "--dim",
        "2",
        "--m",
        "1",
        "--nodes",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let profile = out.join("profile.csv");
    let o = sn_bound(&[
        "check",
        "--dim",
        "2",
        "--m",
        "1",
        "--profile",
        profile.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["nodes"], 1);
    assert_eq!(report["checks"]["decay"]["applicable"], Value::Bool(true));

    let o = sn_bound(&["check", "--dim", "2", "--m", "0", "--u0", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["checks"]["decay"]["applicable"], Value::Bool(false));
    assert_eq!(report["all_pass"], Value::Bool(true));
}

#[test]
fn check_reports_failures_and_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gs");
    assert_eq!(
        sn_bound(&[
            "solve",
            "--dim",
            "2",
            "--m",
            "0",
            "--nodes",
            "0",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // Lower V on one row: the potential is no longer increasing.
    let k = lines.len() / 2;
    let mut cells: Vec<String> = lines[k].split(',').map(str::to_string).collect();
    cells[3] = "0".into();
    lines[k] = cells.join(",");
    let tampered = dir.path().join("tampered.csv");
    std::fs::write(&tampered, lines.join("\n")).unwrap();
    let o = sn_bound(&[
        "check",
        "--dim",
        "2",
        "--m",
        "0",
        "--profile",
        tampered.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("v_increasing"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "r,u,du,V,dV\n0.1,1,0,0,0\n0.2,one,0,0,0\n").unwrap();
    let o = sn_bound(&["check", "--dim", "2", "--m", "0", "--profile", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:3: column u"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(sn_bound(&["solve", "--dim", "2", "--m", "0"]).status.code(), Some(1));
    assert_eq!(
        sn_bound(&["solve", "--dim", "3", "--m", "0", "--nodes", "0", "--out", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(sn_bound(&["check", "--dim", "2", "--m", "0"]).status.code(), Some(1));
    assert_eq!(
        sn_bound(&["check", "--dim", "1", "--parity", "0", "--u0", "1", "--literal-2d"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(sn_bound(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sn_bound(&["--help"]).status.code(), Some(0));
}
