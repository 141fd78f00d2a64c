//! End-to-end tests of the command-line interface: artifact round-trips,
//! report determinism, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphlsq"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn sphlsq")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

fn tmpdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

#[test]
fn gen_then_mz_certifies_unit_condition_number() {
    let dir = tmpdir();
    assert_ok(&run_in(dir.path(), &["gen", "--family", "gauss", "--n", "8", "--out", "L.txt"]));
    let layer = read(dir.path(), "L.txt");
    let mut lines = layer.lines();
    assert_eq!(lines.next().unwrap(), "2 8 162");
    assert_eq!(layer.lines().count(), 163);

    let out = run_in(
        dir.path(),
        &["mz", "--layer", "L.txt", "--n", "8", "--trials", "10", "--out", "mz.json"],
    );
    assert_ok(&out);
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "mz.json")).unwrap();
    assert_eq!(report["format_version"], "1");
    assert_eq!(report["result"]["l_n"], 162);
    let kappa = report["result"]["kappa"].as_f64().unwrap();
    assert!((kappa - 1.0).abs() < 1e-9, "kappa {kappa}");
    assert_eq!(report["result"]["rank_ok"], true);
    assert_eq!(report["result"]["verify"]["within_bounds"], true);
}

#[test]
fn layer_files_roundtrip_to_the_last_digit() {
    let dir = tmpdir();
    let args = [
        "gen", "--family", "fibonacci", "--n", "6", "--oversampling", "2.0", "--perturb", "0.3",
        "--seed", "11",
    ];
    assert_ok(&run_in(dir.path(), &[&args[..], &["--out", "a.txt"]].concat()));
    assert_ok(&run_in(dir.path(), &[&args[..], &["--out", "b.txt"]].concat()));
    // Identical config and seed give byte-identical artifacts.
    assert_eq!(read(dir.path(), "a.txt"), read(dir.path(), "b.txt"));
}

#[test]
fn fit_eval_quad_pipeline() {
    let dir = tmpdir();
    assert_ok(&run_in(dir.path(), &["gen", "--family", "gauss", "--n", "6", "--out", "L.txt"]));
    assert_ok(&run_in(
        dir.path(),
        &[
            "fit", "--layer", "L.txt", "--n", "6", "--t", "3.0", "--lmax", "32", "--pole",
            "0.3,-0.2,0.93", "--out", "A.txt", "--report", "fit.json",
        ],
    ));
    let fit_report: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "fit.json")).unwrap();
    assert!(fit_report["result"]["err_l2_exact"].as_f64().unwrap() > 0.0);

    // Approximant file parses back and evaluates.
    let approx = read(dir.path(), "A.txt");
    assert_eq!(approx.lines().next().unwrap(), "2 6");
    assert_eq!(approx.lines().count(), 50); // header + 49 coefficients

    let out = run_in(dir.path(), &["eval", "--approx", "A.txt", "--point", "0,0,1"]);
    assert_ok(&out);
    let val: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(val.is_finite());

    // Points file route.
    std::fs::write(dir.path().join("P.txt"), "1 0 0\n0 1 0\n0 0 1\n").unwrap();
    assert_ok(&run_in(
        dir.path(),
        &["eval", "--approx", "A.txt", "--points", "P.txt", "--out", "V.txt"],
    ));
    let vals = read(dir.path(), "V.txt");
    assert_eq!(vals.lines().count(), 3);

    assert_ok(&run_in(
        dir.path(),
        &["quad", "--layer", "L.txt", "--n", "6", "--out", "R.txt", "--report", "q.json"],
    ));
    let q: serde_json::Value = serde_json::from_str(&read(dir.path(), "q.json")).unwrap();
    assert_eq!(q["result"]["exactness_degree"], 6);
    let sum_w = q["result"]["sum_w"].as_f64().unwrap();
    assert!((sum_w - 1.0).abs() < 1e-10);
    assert_eq!(q["result"]["has_negative_weights"], false);
    let rule = read(dir.path(), "R.txt");
    assert_eq!(rule.lines().next().unwrap(), "2 6 98 6");

    // Rule applied to the built-in sample source; on this exact layer the
    // integration error is bounded by the fitting error, far below 1e-2.
    assert_ok(&run_in(
        dir.path(),
        &[
            "quad", "--layer", "L.txt", "--n", "6", "--out", "R2.txt", "--report", "q2.json",
            "--integrate", "--t", "3.0", "--lmax", "32", "--pole", "0.3,-0.2,0.93",
        ],
    ));
    let q2: serde_json::Value = serde_json::from_str(&read(dir.path(), "q2.json")).unwrap();
    let integral = q2["result"]["integral"].as_f64().unwrap();
    let gap = q2["result"]["integral_error_exact"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 1e-2, "integral {integral}");
    assert!(gap < 1e-2 && gap > 0.0);
}

#[test]
fn sweep_reports_are_byte_deterministic() {
    // Identical config (including output names) in two working directories.
    let dir_a = tmpdir();
    let dir_b = tmpdir();
    let args = [
        "sweep", "--family", "gauss", "--n-list", "4,6,8", "--t", "3.0", "--lmax", "32",
        "--pole", "0.1,0.2,0.97", "--lebesgue-grid", "16", "--out-csv", "s.csv", "--out-json",
        "s.json",
    ];
    assert_ok(&run_in(dir_a.path(), &args));
    assert_ok(&run_in(dir_b.path(), &args));
    let a_csv = read(dir_a.path(), "s.csv");
    assert_eq!(a_csv, read(dir_b.path(), "s.csv"));
    assert_eq!(read(dir_a.path(), "s.json"), read(dir_b.path(), "s.json"));
    let dir = dir_a;

    let mut lines = a_csv.lines();
    assert_eq!(lines.next().unwrap(), "n,l_n,kappa,err_l2,err_Sn,err_quad,lebesgue");
    assert_eq!(a_csv.lines().count(), 4);
    // Every row carries a lebesgue estimate when the grid is requested.
    for line in a_csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 7);
        assert!(!line.ends_with(','), "missing lebesgue value in {line}");
    }

    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "s.json")).unwrap();
    let slope = json["result"]["slope_l2"]["slope"].as_f64().unwrap();
    assert!(slope < -1.0, "slope {slope}");
}

#[test]
fn lebesgue_report_structure() {
    let dir = tmpdir();
    assert_ok(&run_in(
        dir.path(),
        &[
            "lebesgue", "--family", "gauss", "--n-list", "0,2,4", "--grid-resolution", "16",
            "--out", "leb.json",
        ],
    ));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "leb.json")).unwrap();
    let rows = json["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let v0 = rows[0]["value"].as_f64().unwrap();
    assert!((v0 - 1.0).abs() < 1e-12);
    assert_eq!(rows[0]["refinements"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tmpdir();
    // Unknown flag: validation error, exit 2 (clap's own convention too).
    let out = run_in(dir.path(), &["gen", "--family", "gauss", "--n", "2", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown family: our validation, exit 2.
    let out = run_in(dir.path(), &["gen", "--family", "cubes", "--n", "2", "--out", "x.txt"]);
    assert_eq!(out.status.code(), Some(2));

    // Missing input file: I/O error, exit 4.
    let out = run_in(dir.path(), &["mz", "--layer", "missing.txt", "--n", "3"]);
    assert_eq!(out.status.code(), Some(4));

    // Undersampled layer: numerical failure, exit 3, and the report still
    // records the deficiency.
    assert_ok(&run_in(
        dir.path(),
        &[
            "gen", "--family", "fibonacci", "--n", "5", "--oversampling", "0.8", "--out",
            "small.txt",
        ],
    ));
    let out = run_in(
        dir.path(),
        &["mz", "--layer", "small.txt", "--n", "5", "--out", "bad.json"],
    );
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "bad.json")).unwrap();
    assert_eq!(report["result"]["rank_ok"], false);
    assert!(report["result"]["deficiency"].as_str().unwrap().contains("29"));

    // Corrupt layer file: validation, exit 2.
    std::fs::write(dir.path().join("corrupt.txt"), "2 1 1\n2 0 0 0.5\n").unwrap();
    let out = run_in(dir.path(), &["mz", "--layer", "corrupt.txt", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let dir = tmpdir();
    let out = run_in(dir.path(), &["selftest"]);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn thread_env_var_is_validated() {
    let dir = tmpdir();
    let out = bin()
        .current_dir(dir.path())
        .env("SPHLSQ_THREADS", "zero")
        .args(["selftest"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .current_dir(dir.path())
        .env("SPHLSQ_THREADS", "1")
        .args(["gen", "--family", "gauss", "--n", "2", "--out", "t.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn values_file_fit_roundtrip() {
    let dir = tmpdir();
    assert_ok(&run_in(dir.path(), &["gen", "--family", "gauss", "--n", "3", "--out", "L.txt"]));
    // Constant samples: the fit recovers the constant polynomial, whose
    // evaluation anywhere is 1.
    let count = read(dir.path(), "L.txt").lines().count() - 1;
    let ones: String = "1.0\n".repeat(count);
    std::fs::write(dir.path().join("vals.txt"), ones).unwrap();
    assert_ok(&run_in(
        dir.path(),
        &["fit", "--layer", "L.txt", "--n", "3", "--values", "vals.txt", "--out", "A.txt"],
    ));
    let out = run_in(dir.path(), &["eval", "--approx", "A.txt", "--point", "0.5,0.5,0.70710678"]);
    assert_ok(&out);
    let val: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((val - 1.0).abs() < 1e-10, "constant fit evaluates to {val}");
}
