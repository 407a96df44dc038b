//! End-to-end runs of the `agenda` binary.

use serde_json::Value;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(rel).to_string_lossy().into_owned()
}

fn agenda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agenda")).args(args).output().unwrap()
}

fn agenda_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_agenda"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn version_reports_schema() {
    let out = agenda(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("schema 1"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(agenda(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(agenda(&["solve"]).status.code(), Some(2));
    assert_eq!(agenda(&["solve", "-i", &data("six_poi/problem.json"), "--metric", "m9"]).status.code(), Some(2));
    assert_eq!(agenda(&["solve", "-i", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn solve_and_oracle_agree() {
    let p = data("six_poi/problem.json");
    let solved = agenda(&["solve", "--metric", "m1", "--grid", "10", "-i", &p]);
    assert!(solved.status.success(), "{}", String::from_utf8_lossy(&solved.stderr));
    let oracle = agenda(&["oracle", "--metric", "m1", "--grid", "10", "-i", &p]);
    assert!(oracle.status.success());
    let (s, o) = (json(&solved), json(&oracle));
    assert_eq!(s["metric"], "m1");
    assert_eq!(s["objective"], o["objective"]);
    assert_eq!(s["plan"], o["plan"]);
    assert_eq!(s["proven_optimal"], true);
}

#[test]
fn score_reports_m2_of_plan1() {
    let out =
        agenda(&["score", "--metric", "m2", "-i", &data("six_poi/problem.json"), "-p", &data("six_poi/plan1.json")]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["objective_value"].as_f64().unwrap() - 0.70).abs() < 0.05);
    assert_eq!(v["report"]["rounded"]["m1"], 1.0914);
}

#[test]
fn score_reads_the_plan_from_stdin() {
    let plan = std::fs::read(data("six_poi/plan4.json")).unwrap();
    let out = agenda_stdin(&["score", "-i", &data("six_poi/problem.json"), "-p", "-"], &plan);
    assert!(out.status.success());
    assert_eq!(json(&out)["rounded"]["p_visits"], 0.8333);
}

#[test]
fn validate_exit_codes() {
    let p = data("six_poi/problem.json");
    let ok = agenda(&["validate", "-i", &p, "-p", &data("six_poi/plan1.json")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok), serde_json::json!([]));

    let mut bad: Value = serde_json::from_slice(&std::fs::read(data("six_poi/plan1.json")).unwrap()).unwrap();
    bad["visits"][0]["dur"] = serde_json::json!(10);
    let out = agenda_stdin(&["validate", "-i", &p, "-p", "-"], bad.to_string().as_bytes());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)[0]["code"], "DurationOutOfBounds");

    let explained = agenda(&["validate", "--explain", "-i", &p, "-p", &data("six_poi/plan1.json")]);
    assert!(String::from_utf8_lossy(&explained.stdout).contains("total slack: 10 min"));
}

#[test]
fn malformed_documents_are_domain_errors() {
    let out = agenda_stdin(&["solve", "-i", "-"], b"{\"route\": 3}");
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("route"));
}

#[test]
fn gen_is_deterministic_and_matches_golden() {
    let args = ["gen", "--seed", "1", "--n", "5", "--horizon", "180", "--pref-visits", "few", "--pref-occup", "high"];
    let a = agenda(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, agenda(&args).stdout);
    let golden = std::fs::read(data("golden/gen_seed1_n5_h180.json")).unwrap();
    assert_eq!(a.stdout, golden);
}

#[test]
fn export_pddl_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let out = agenda(&["export-pddl", "-i", &data("pddl/two_poi.json"), "--out-dir", &out_dir]);
    assert!(out.status.success());
    let domain = std::fs::read_to_string(dir.path().join("domain.pddl")).unwrap();
    assert_eq!(domain, std::fs::read_to_string(data("golden/domain.pddl")).unwrap());
    let problem = std::fs::read_to_string(dir.path().join("problem-two_poi.pddl")).unwrap();
    assert!(problem.contains("(/ (* 250 (is-violated p1)) 532)"));

    let rejected = agenda(&["export-pddl", "-i", &data("pddl/two_poi.json"), "--metric", "m2"]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn import_plan_from_trace() {
    let out = agenda(&["import-plan", "-i", &data("six_poi/problem.json"), "-t", &data("six_poi/plan1.trace")]);
    assert!(out.status.success());
    let expected: Value = serde_json::from_slice(&std::fs::read(data("six_poi/plan1.json")).unwrap()).unwrap();
    assert_eq!(json(&out), expected);

    let out = agenda_stdin(&["import-plan", "-i", &data("six_poi/problem.json")], b"0: (visit nowhere tourist) [5]");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let out = agenda(&[
        "bench",
        "--sizes",
        "3",
        "--horizons",
        "180",
        "--per-combo",
        "1",
        "--metrics",
        "m1,m2",
        "--time-limit",
        "5",
        "--sequential",
        "--out-dir",
        &out_dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("table,metric,group,"));
    assert_eq!(std::fs::read_dir(dir.path().join("instances")).unwrap().count(), 9);
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 9 * 2);
}
