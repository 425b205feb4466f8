use std::path::Path;
use std::process::{Command, Output};

use ca_consensus::io::parse_pgm;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ca-consensus"))
        .args(args)
        .arg("--quiet")
        .arg("--out")
        .arg(out)
        .env_remove("CA_CONSENSUS_OUT")
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_gkl_reaches_consensus() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["simulate", "--rule", "gkl", "--n", "149", "--p", "0.6", "--steps", "149", "--seed", "7"]);
    let rows = parse_pgm(&std::fs::read(d.path().join("spacetime.pgm")).unwrap()).unwrap();
    assert_eq!((rows.len(), rows[0].len()), (150, 149));
    let m = manifest(d.path());
    assert_eq!(m["results"]["consensus_reached"], true);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["subcommand"], "simulate");
    for f in ["spacetime.pgm", "final.csv", "manifest.json"] {
        assert!(m["outputs"].as_array().unwrap().iter().any(|v| v == f));
    }
}

#[test]
fn simulate_single_cell() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["simulate", "--rule", "e232", "--n", "1", "--p", "0", "--steps", "0"]);
    assert_eq!(std::fs::read(d.path().join("spacetime.pgm")).unwrap(), b"P5\n1 1\n255\n\xff");
    assert_eq!(std::fs::read_to_string(d.path().join("final.csv")).unwrap(), "cell,value\n0,0\n");
}

#[test]
fn simulate_2d_with_slice() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["simulate", "--rule", "t2d:moore9:976", "--size", "100x100", "--p", "0.3", "--steps", "400", "--slice", "50"]);
    for f in ["initial.pgm", "final.pgm", "slice.pgm"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
    let slice = parse_pgm(&std::fs::read(d.path().join("slice.pgm")).unwrap()).unwrap();
    assert_eq!((slice.len(), slice[0].len()), (401, 100));
    assert!(manifest(d.path())["results"]["final_density"].as_f64().unwrap() < 0.05);
}

#[test]
fn stg_reports() {
    let d = tempfile::tempdir().unwrap();
    assert!(ok(d.path(), &["stg", "--rule", "gkl", "--n", "5"]).starts_with("wrong=0 stuck=0"));
    let s = ok(d.path(), &["stg", "--rule", "gkl", "--n", "11"]);
    assert!(s.starts_with("wrong=22 "), "{s}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["wrong_margins"], serde_json::json!(["6-5"]));
    let csv = std::fs::read_to_string(d.path().join("stg.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2048);
}

#[test]
fn multiway_sort_has_single_terminal() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["multiway", "--block", "sort", "--init", "1010"]);
    assert!(s.contains("terminal=0011"), "{s}");
    let dot = std::fs::read_to_string(d.path().join("multiway.dot")).unwrap();
    assert_eq!(dot.matches("doublecircle").count(), 1);
    assert!(dot.contains("label=\"0011\", shape=doublecircle"));
}

#[test]
fn search_and_phase_write_tables() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["search", "--sample", "12", "--rules", "4272826020", "--n", "21", "--steps", "20", "--trials", "8", "--top", "3"]);
    let top = std::fs::read_to_string(d.path().join("top.csv")).unwrap();
    assert_eq!(top.lines().count(), 4);
    let results = std::fs::read_to_string(d.path().join("results.csv")).unwrap();
    assert!(results.starts_with("rule,metric_exact,metric_agree,trials,spec_hash\n"));
    assert_eq!(results.lines().count(), 14);
    let p = tempfile::tempdir().unwrap();
    ok(p.path(), &["phase", "--rule", "gkl", "--n", "31", "--steps", "40", "--p", "0,1", "--q", "0,0.5", "--trials", "3"]);
    let csv = std::fs::read_to_string(p.path().join("phase.csv")).unwrap();
    assert!(csv.starts_with("p,q,mean_final_density\n0,0,0\n"), "{csv}");
    assert!(csv.contains("\n1,0,1\n"), "{csv}");
}

#[test]
fn graph_and_attack() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["graph", "--graph", "complete:9", "--p", "0.6", "--trials", "50"]);
    let m = manifest(d.path());
    let s = &m["results"]["success"];
    assert_eq!(s["successes"], s["counted"]);
    let a = tempfile::tempdir().unwrap();
    ok(a.path(), &["attack", "--rule", "gkl", "--n", "49", "--p", "0.55", "--max-flips", "2", "--seed", "1"]);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("attack.json")).unwrap()).unwrap();
    assert_eq!(r["flips"], serde_json::json!([3, 11]));
}

#[test]
fn errors_name_the_flag() {
    let d = tempfile::tempdir().unwrap();
    for (args, flag) in [
        (&["simulate", "--rule", "e300", "--n", "5"][..], "--rule"),
        (&["simulate", "--rule", "gkl", "--n", "5", "--p", "1.5"], "--p"),
        (&["simulate", "--rule", "t2d:vn5:56", "--size", "4by4"], "--size"),
        (&["stg", "--rule", "gkl", "--n", "30"], "--n"),
        (&["multiway", "--block", "sort", "--init", "10a"], "--init"),
        (&["search", "--range", "5..3"], "--range"),
    ] {
        let o = run(d.path(), args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
    assert!(std::fs::read_dir(d.path()).map_or(true, |mut it| it.next().is_none()));
}

#[test]
fn failure_removes_partial_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["graph", "--graph", "ring:30", "--stg", "--trials", "5"]);
    assert!(!o.status.success());
    assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 0);
}

#[test]
fn exhaustive_search_needs_confirmation() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["search", "--exhaustive", "--trials", "4", "--n", "15"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("exhaustive search over 4294967296 rules"), "{err}");
    assert!(err.contains("--yes"), "{err}");
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let target = d.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_ca-consensus"))
        .args(["multiway", "--block", "sort", "--init", "110", "--quiet"])
        .env("CA_CONSENSUS_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("multiway.dot").exists());
}
