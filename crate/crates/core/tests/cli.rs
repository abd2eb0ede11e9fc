//! End-to-end runs of the `natspec` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use natural_spectrum::io::read_measure;
use serde_json::Value;
use tempfile::TempDir;

const FAST: [&str; 6] = ["--N", "2000", "--grid", "64", "--tol", "0.1"];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn natspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natspec"))
        .args(args)
        .output()
        .expect("natspec runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn decompose(input: &str, dir: &Path, extra: &[&str]) -> Output {
    let input = fixture(input);
    let mut args = vec![
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    natspec(&args)
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["verification"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&natspec(&["--help"])), 0);
    assert_eq!(code(&natspec(&[])), 2);
    assert_eq!(code(&natspec(&["decompose"])), 2);
    assert_eq!(code(&natspec(&["frobnicate"])), 2);
}

#[test]
fn decompose_dirac() {
    let dir = TempDir::new().unwrap();
    let out = decompose("dirac.json", dir.path(), &FAST);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    let a = check(&report, "a_identity");
    assert_eq!(a["status"], "pass");
    assert!(a["residual"].as_f64().unwrap() < 1e-9);
    assert!(report["generated_at"].is_string());
    for name in ["nu0.json", "nu1.json", "nu2.json"] {
        read_measure(&dir.path().join(name)).unwrap();
    }
}

#[test]
fn decompose_zero_measure() {
    let dir = TempDir::new().unwrap();
    let out = decompose("zero.json", dir.path(), &FAST);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["nu0.json", "nu1.json", "nu2.json"] {
        assert!(
            read_measure(&dir.path().join(name)).unwrap().is_zero(),
            "{name}"
        );
    }
}

#[test]
fn decomposition_outputs_sum_to_the_input() {
    let dir = TempDir::new().unwrap();
    let out = decompose("mixed.json", dir.path(), &FAST);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let parts: Vec<_> = ["nu0.json", "nu1.json", "nu2.json"]
        .iter()
        .map(|n| read_measure(&dir.path().join(n)).unwrap())
        .collect();
    let mu = read_measure(&fixture("mixed.json")).unwrap();
    let basis = parts[0].basis().clone();
    let mu = mu.rebase(basis).unwrap();
    let sum = parts[0].add(&parts[1]).unwrap().add(&parts[2]).unwrap();
    let diff = sum.sub(&mu).unwrap();
    assert!(diff.tv_norm().value < 1e-9, "{:?}", diff.tv_norm());
}

#[test]
fn malformed_and_missing_inputs() {
    let dir = TempDir::new().unwrap();
    let out = decompose("malformed.json", dir.path(), &FAST);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(code(&decompose("absent.json", dir.path(), &FAST)), 2);
}

#[test]
fn manual_radius_below_the_sampled_sup_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["--radius-mode", "manual:0.1,0.1"];
    args.extend_from_slice(&FAST);
    assert_eq!(code(&decompose("dirac.json", dir.path(), &args)), 2);
    let mut args = vec!["--radius-mode", "manual:2,2"];
    args.extend_from_slice(&FAST);
    assert_eq!(code(&decompose("dirac.json", dir.path(), &args)), 0);
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["r0"], 2.0);
}

#[test]
fn exact_discrete_rejects_a_density() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["--radius-mode", "exact_discrete"];
    args.extend_from_slice(&FAST);
    assert_eq!(code(&decompose("mixed.json", dir.path(), &args)), 2);
    assert_eq!(code(&decompose("dirac.json", dir.path(), &args)), 0);
}

#[test]
fn spectral_radius_of_rho_brackets_one() {
    let dir = TempDir::new().unwrap();
    let input = fixture("rho.json");
    let out = natspec(&[
        "spectral-radius",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = json(&dir.path().join("spectral_radius.json"));
    let lo = body["bracket"][0].as_f64().unwrap();
    let hi = body["bracket"][1].as_f64().unwrap();
    assert!(lo <= 1.0 && 1.0 <= hi, "[{lo}, {hi}]");
    assert!(hi - lo < 1e-3);
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("re,im"));
    assert_eq!(csv.lines().count(), 256 * 256 + 1);
}

#[test]
fn kronecker_origin_is_n_zero() {
    let out = natspec(&["kronecker", "--x", "0", "--y", "0"]);
    assert_eq!(code(&out), 0);
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["found"], true);
    assert_eq!(body["solution"]["n"], 0);
}

#[test]
fn kronecker_reports_a_miss() {
    let out = natspec(&[
        "kronecker",
        "--x",
        "0.3",
        "--y",
        "-0.2",
        "--eps",
        "1e-6",
        "--nmax",
        "10",
    ]);
    assert_eq!(code(&out), 1);
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["found"], false);
}

#[test]
fn kronecker_hits_a_target_with_parity() {
    let out = natspec(&["kronecker", "--target", "0.3,-0.4", "--parity", "odd"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    let hit = &body["solution"];
    assert_eq!(hit["n"].as_i64().unwrap().rem_euclid(2), 1);
    assert!(hit["distance"].as_f64().unwrap() < 0.05);
}

#[test]
fn density_scan_rows() {
    let out = natspec(&["density-scan", "--N", "1024"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rows.headers().unwrap().iter().collect::<Vec<_>>(),
        ["N", "all", "even", "odd"]
    );
    let rows: Vec<Vec<f64>> = rows
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (16u64 << i) as f64);
    }
    for w in rows.windows(2) {
        for col in 1..4 {
            assert!(w[1][col] <= w[0][col], "{w:?}");
        }
    }
    assert_eq!(code(&natspec(&["density-scan", "--N", "1000"])), 2);
}

#[test]
fn worker_count_does_not_change_results() {
    let one = TempDir::new().unwrap();
    let four = TempDir::new().unwrap();
    for (dir, workers) in [(&one, "1"), (&four, "4")] {
        let mut args = vec!["--workers", workers];
        args.extend_from_slice(&FAST);
        let out = decompose("mixed.json", dir.path(), &args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["nu0.json", "nu1.json", "nu2.json"] {
        assert_eq!(
            fs::read(one.path().join(name)).unwrap(),
            fs::read(four.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let strip = |p: &Path| {
        let text = fs::read_to_string(p).unwrap();
        text.lines()
            .filter(|l| !l.contains("generated_at"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(&one.path().join("report.json")),
        strip(&four.path().join("report.json"))
    );
}
