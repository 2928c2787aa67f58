use std::fs;
use std::path::Path;

use hoamp_core::harness::{run, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};

fn hoamp(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hoamp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn factor_35_prints_factors() {
    let d = tempfile::tempdir().unwrap();
    let (code, out, _) = hoamp(&[
        "factor",
        "--n",
        "35",
        "--seed",
        "7",
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("5 × 7"), "{out}");
    let csv = fs::read_to_string(d.path().join("factor_records.csv")).unwrap();
    assert!(csv.starts_with("l,t_l,alpha,pr_E,C_l,lambda_l,fidelity\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("factor_report.json")).unwrap())
            .unwrap();
    assert_eq!(json["seed"], 7);
    assert_eq!(json["config"]["n"], 35);
    assert!(json["version"].is_string());
}

#[test]
fn format_selects_outputs() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, _) = hoamp(&[
        "factor",
        "--n",
        "77",
        "--format",
        "csv",
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(d.path().join("factor_records.csv").exists());
    assert!(!d.path().join("factor_report.json").exists());
}

#[test]
fn prime_is_no_factor() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = hoamp(&["factor", "--n", "13", "--out-dir", dir_arg(d.path())]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(err.contains("13"));
}

#[test]
fn usage_errors() {
    assert_eq!(hoamp(&["factor"]).0, EXIT_USAGE);
    assert_eq!(hoamp(&["nope"]).0, EXIT_USAGE);
    assert_eq!(
        hoamp(&[
            "factor",
            "--n",
            "35",
            "--alpha",
            "2",
            "--alpha-schedule",
            "1,2"
        ])
        .0,
        EXIT_USAGE
    );
    assert_eq!(
        hoamp(&["factor", "--n", "35", "--alpha-schedule", "2,1"]).0,
        EXIT_USAGE
    );
    assert_eq!(hoamp(&["stats", "--samples", "1"]).0, EXIT_USAGE);
    assert_eq!(hoamp(&["--help"]).0, EXIT_OK);
}

#[test]
fn search_reports_marked_indices() {
    let d = tempfile::tempdir().unwrap();
    let list = d.path().join("marked.txt");
    fs::write(&list, "17\n512, 1000\n").unwrap();
    let (code, out, _) = hoamp(&[
        "search",
        "--domain",
        "1024",
        "--solutions-file",
        list.to_str().unwrap(),
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solutions: 17 512 1000"), "{out}");

    let mask = d.path().join("mask.txt");
    fs::write(&mask, "0010000000000001").unwrap();
    let (code, out, _) = hoamp(&[
        "search",
        "--domain",
        "16",
        "--solutions-file",
        mask.to_str().unwrap(),
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solutions: 2 15"), "{out}");

    let empty = d.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let (code, _, _) = hoamp(&[
        "search",
        "--domain",
        "16",
        "--solutions-file",
        empty.to_str().unwrap(),
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_INFEASIBLE);
}

#[test]
fn solve_matches_brute_force() {
    let d = tempfile::tempdir().unwrap();
    let sys = d.path().join("sys.json");
    fs::write(
        &sys,
        r#"{"variables":[{"name":"m1","upper":3},{"name":"m2","upper":3}],
            "constraints":[{"expr":"m1 + 2*m2","relation":"<=","bound":4}]}"#,
    )
    .unwrap();
    let (code, out, _) = hoamp(&[
        "solve",
        "--system",
        sys.to_str().unwrap(),
        "--out-dir",
        dir_arg(d.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    let tuples: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(
        tuples,
        ["(0, 0)", "(0, 1)", "(0, 2)", "(1, 0)", "(1, 1)", "(2, 0)", "(2, 1)", "(3, 0)"]
    );

    fs::write(
        &sys,
        r#"{"variables":[{"name":"x","upper":3}],"constraints":[{"expr":"x","relation":">=","bound":4}]}"#,
    )
    .unwrap();
    assert_eq!(
        hoamp(&[
            "solve",
            "--system",
            sys.to_str().unwrap(),
            "--out-dir",
            dir_arg(d.path())
        ])
        .0,
        EXIT_INFEASIBLE
    );
}

#[test]
fn stats_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let (code, _, _) = hoamp(&[
            "stats",
            "--samples",
            "20",
            "--seed",
            "3",
            "--out-dir",
            dir_arg(d.path()),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    for f in ["stats_summary.csv", "stats_long.csv", "stats_report.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let summary = fs::read_to_string(a.path().join("stats_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 11);
}
