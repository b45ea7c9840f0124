mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data_path;

fn narp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_narp")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn deck() -> String {
    data_path("five_area.txt").display().to_string()
}

#[test]
fn version_prints_package_version() {
    let o = narp(&["version"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), format!("narp {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn validate_bundled_deck() {
    let o = narp(&["validate", &deck()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("5 areas, 160 units, 5 tie-lines"));
}

#[test]
fn ownership_shares_summing_to_99_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data_path("five_area.txt")).unwrap().replace("10,20,30,40,0", "10,20,30,39,0");
    let bad = dir.path().join("bad_deck.txt");
    fs::write(&bad, text).unwrap();
    let o = narp(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let stderr = String::from_utf8_lossy(&o.stderr);
    let diags: Vec<&str> = stderr.lines().filter(|l| l.contains("ZZOD") || l.starts_with("warning:")).collect();
    assert_eq!(diags.len(), 1, "{stderr}");
    assert!(diags[0].ends_with("ZZOD row 1: shares sum ≠ 100"), "{stderr}");
}

#[test]
fn unreadable_deck_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.txt");
    fs::write(&bad, "ZZMC\n1 2 3\n").unwrap();
    assert_eq!(code(&narp(&["validate", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&narp(&["validate", "/nonexistent/deck.txt"])), 2);
    assert_eq!(code(&narp(&["simulate", &deck(), "--loss-sharing", "7"])), 2);
}

#[test]
fn one_year_cannot_converge_but_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = narp(&["simulate", &deck(), "--fin", "1", "-o", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("FINAL RESULTS AFTER 1 REPLICATIONS"));
    assert!(report.contains("FIN                         1                   command line"));
}

#[test]
fn loose_threshold_converges_with_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = narp(&["simulate", &deck(), "--cvt", "0.3", "--format", "both", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("converged after"));
    assert!(out.join("report.txt").is_file());
    for f in ["final_results.csv", "dist_pool.csv", "dist_area_5.csv", "convergence_trace.csv"] {
        assert!(out.join("tables").join(f).is_file(), "{f}");
    }
}

#[test]
fn schedule_writes_plan() {
    let dir = tempfile::tempdir().unwrap();
    let o = narp(&["schedule", &deck(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("schedule.txt")).unwrap();
    assert!(text.contains("A13201     400.00 .....................................AA............."));
}

#[test]
fn impossible_maintenance_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    // a 3-week outage cannot fit a window of weeks 1-4 when weeks 2-3 are forbidden
    let text = fs::read_to_string(data_path("five_area.txt"))
        .unwrap()
        .replace("1  'A1'  3000  0  1  52  31  32  30000", "1  'A1'  3000  0  1  4  2  3  30000")
        .replace("0  0  0  2  0  0  1\n", "0  0  0  3  0  0  1\n");
    let deck = dir.path().join("tight.txt");
    fs::write(&deck, text).unwrap();
    let o = narp(&["schedule", deck.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_case_file() {
    let o = narp(&["solve-case", data_path("two_area_case.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("STATUS,Optimal"));
    assert!(out.contains("TOTAL_SHED,30.000000"), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "AREA,X,1,2,3,4\n").unwrap();
    assert_eq!(code(&narp(&["solve-case", bad.to_str().unwrap()])), 2);
    assert!(!Path::new("bad.csv").exists());
}
