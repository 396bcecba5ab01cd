//! End-to-end checks of the binary: exit codes, JSON determinism, and the
//! algebra-file path.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phi-loop"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn algebra_path(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("algebras");
    p.push(name);
    p.display().to_string()
}

#[test]
fn bracket_heisenberg_central_value() {
    let out = run(&[
        "bracket",
        "--builtin",
        "heisenberg",
        "--p",
        "x^2",
        "--u",
        "a:(x^-1)",
        "--v",
        "a:(x)",
        "--json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["central"], "-1");
    assert!(v["parts"].as_object().unwrap().is_empty());
}

#[test]
fn bracket_with_algebra_file() {
    let out = run(&[
        "bracket",
        "--algebra",
        &algebra_path("sl2.json"),
        "--p",
        "x",
        "--u",
        "e:(x^-1)",
        "--v",
        "f:(x)",
        "--json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // [e (x) x^-1, f (x) x] = h (x) 1 - c in the current algebra.
    assert_eq!(v["parts"]["h"], "1");
    assert_eq!(v["central"], "-1");
}

#[test]
fn delta_table_prints_json_rows() {
    let out = run(&["delta-table", "--p", "x", "--window", "3"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    // For p = x the base term is the plain delta: 1 exactly on n = m + 1.
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.as_array().unwrap().iter().enumerate() {
            let m = i as i64 - 3;
            let n = j as i64 - 3;
            let expected = if n == m + 1 { "1" } else { "0" };
            assert_eq!(cell, expected, "({}, {})", m, n);
        }
    }
}

#[test]
fn malformed_deformation_is_usage_error() {
    let out = run(&["verify", "phi", "--p", "1 +"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = run(&["verify", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_deformation_is_usage_error() {
    let out = run(&[
        "bracket",
        "--builtin",
        "heisenberg",
        "--p",
        "0",
        "--u",
        "a:(x)",
        "--v",
        "a:(x)",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_small_suite_passes_with_exit_zero() {
    let out = run(&["verify", "phi", "--p", "x", "--json"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn hyphen_leading_values_are_accepted() {
    let out = run(&[
        "verify", "fock", "--p", "x", "--level", "-2", "--window", "4", "--degree", "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "bracket",
        "--builtin",
        "heisenberg",
        "--p",
        "-x",
        "--u",
        "a:(x^-1)",
        "--v",
        "a:(x)",
        "--json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // The central cocycle is independent of p, including p = -x.
    assert_eq!(v["central"], "-1");
}

#[test]
fn verify_report_bytes_are_deterministic() {
    let args = [
        "verify",
        "loop",
        "--p",
        "x",
        "--samples",
        "5",
        "--seed",
        "9",
        "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_accepts_algebra_files() {
    for (file, suite) in [("sl2.json", "affine"), ("novikov.json", "novikov")] {
        let out = run(&[
            "verify",
            suite,
            "--p",
            "x",
            "--algebra",
            &algebra_path(file),
            "--samples",
            "5",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{} {}: {}",
            file,
            suite,
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn invalid_algebra_file_names_the_violated_identity() {
    let dir = std::env::temp_dir().join("phi-loop-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "basis": ["a", "b"],
            "brackets": {"[a,b]": {"a": "1"}},
            "form": [["1","0"],["0","1"]]
        }"#,
    )
    .unwrap();
    let out = run(&[
        "verify",
        "affine",
        "--algebra",
        path.to_str().unwrap(),
        "--samples",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("jacobi") || err.contains("invariance") || err.contains("antisymmetry"),
        "stderr: {}",
        err
    );
}
