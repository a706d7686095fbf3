use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;

use gronwall_cli::format_number;

fn gronwall(args: &[&Path], extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gronwall"))
        .args(args)
        .args(extra)
        .output()
        .expect("run gronwall")
}

fn write_job(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn read_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader
        .headers()
        .unwrap()
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn envelope_mode_brackets_the_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.csv");
    let job = write_job(
        dir.path(),
        "env.json",
        &format!(
            r#"{{"mode": "envelope", "t0": 0, "t1": 1, "n": 51, "u0": 2, "v": 1, "output": "{}"}}"#,
            out.display()
        ),
    );
    let run = gronwall(&[&job], &[]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let (header, rows) = read_rows(&out);
    assert_eq!(header, "t,lower,upper");
    assert_eq!(rows.len(), 51);
    for r in &rows {
        let t = r[0];
        assert!((r[1] - 2.0 * (-t).exp()).abs() <= 1e-12);
        assert!((r[2] - 2.0 * t.exp()).abs() <= 1e-12);
    }
}

#[test]
fn output_and_grid_flags_override_the_job() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "b.json",
        r#"{"mode": "bound", "t0": 0, "t1": 2, "n": 11, "c": 1, "v": "abs(sin(t))", "f": [0, 1, 0.5]}"#,
    );
    let out = dir.path().join("override.csv");
    let run = gronwall(
        &[&job],
        &[
            "--output",
            out.to_str().unwrap(),
            "--grid-n",
            "33",
            "--quiet",
        ],
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(run.stdout.is_empty());
    let (header, rows) = read_rows(&out);
    assert_eq!(header, "t,classic_bound,general_bound");
    assert_eq!(rows.len(), 33);
    assert_eq!(rows[32][0], 2.0);
    assert!(rows.iter().all(|r| r[2] >= r[1]));
}

#[test]
fn missing_output_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "b.json",
        r#"{"mode": "bound", "t0": 0, "t1": 1, "n": 11, "c": 1, "v": 0}"#,
    );
    let run = gronwall(&[&job], &[]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("output"));
}

#[test]
fn parse_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "bad.json",
        "{\n  \"mode\": \"bound\",\n  \"c\": ,\n}\n",
    );
    let run = gronwall(&[&job], &[]);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn expression_errors_name_field_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "expr.json",
        r#"{"mode": "bound", "t0": 0, "t1": 1, "n": 11, "c": 1, "v": "1 + sqrt(t)", "output": "x.csv"}"#,
    );
    let run = gronwall(&[&job], &[]);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(
        err.contains("`v`") && err.contains("column 5") && err.contains("sqrt"),
        "{err}"
    );
}

#[test]
fn missing_config_file_is_an_input_error() {
    let run = gronwall(&[Path::new("/nonexistent/job.json")], &[]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn mismatched_system_dimensions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "l.json",
        r#"{"mode": "linsys", "t0": 0, "t1": 1, "n": 11, "a": [[0, 1], [1, 0]], "y0": [1, 0, 0], "output": "x.csv"}"#,
    );
    assert_eq!(gronwall(&[&job], &[]).status.code(), Some(2));
}

#[test]
fn riccati_compare_reports_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let job = write_job(
        dir.path(),
        "r.json",
        &format!(
            r#"{{"mode": "riccati-compare", "t0": 0, "t1": 1, "n": 4001, "c": 1,
                "v": "1 + 0.5*cos(t)", "f": "1 + 0.5*sin(2*t)", "output": "{}"}}"#,
            out.display()
        ),
    );
    let run = gronwall(&[&job], &[]);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(run.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("condition_holds: true"));
    assert!(stdout.contains("comparison_holds: true"));
    let (header, rows) = read_rows(&out);
    assert_eq!(header, "t,y,x");
    assert!(rows
        .iter()
        .all(|r| r[1] <= r[2] + 1e-7 * (1.0 + r[2].abs())));
}

#[test]
fn riccati_compare_flags_violating_u() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "r.json",
        r#"{"mode": "riccati-compare", "t0": 0, "t1": 1, "n": 101, "c": 1, "v": 1, "u": "10", "output": "x.csv"}"#,
    );
    let run = gronwall(&[&job], &[]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn verify_suite_prints_counts_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.csv");
    let job = write_job(
        dir.path(),
        "s.json",
        &format!(
            r#"{{"mode": "verify-suite", "seed": 3, "count": 2, "output": "{}"}}"#,
            out.display()
        ),
    );
    let run = gronwall(&[&job], &[]);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(run.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().count(), 5);
    assert!(stdout.lines().all(|l| l.starts_with("PASS 2/2 ")));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("suite,passed,total\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn coarse_suite_reports_verification_failure() {
    // On a five-node grid the quadrature error breaks the 1e-4 tightness check.
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "s.json",
        r#"{"mode": "verify-suite", "count": 3}"#,
    );
    let run = gronwall(&[&job], &["--grid-n", "5"]);
    assert_eq!(
        run.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("FAIL"));
}

#[test]
fn output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let job = write_job(
        dir.path(),
        "d.json",
        &format!(
            r#"{{"mode": "bound", "t0": 0, "t1": 3, "n": 301, "c": 0.7, "v": "exp(-t)", "f": "abs(cos(5*t))", "output": "{}"}}"#,
            out.display()
        ),
    );
    gronwall(&[&job], &[]);
    let first = fs::read(&out).unwrap();
    gronwall(&[&job], &[]);
    assert_eq!(first, fs::read(&out).unwrap());
    assert!(!first.contains(&b'\r'));
}

proptest! {
    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
