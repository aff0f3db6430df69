use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dpmatch"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

// A 4-cycle with one chord; best matching takes the two heavy opposite edges.
const GRAPH: &str = "0 1 5\n1 2 1\n2 3 5\n3 0 1\n0 2 2\n";

fn graph_file() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "g.txt", GRAPH);
    (dir, p)
}

#[test]
fn solve_reports_a_feasible_matching() {
    let (dir, g) = graph_file();
    let out = dir.path().join("report.json");
    let o = run(&["solve", "--input", g.to_str().unwrap(), "--assert", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["matching", "weight", "rescaled_weight", "ratio_bound", "rounds", "peak_space", "termination", "diagnostics"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["weight"].as_f64().unwrap(), 10.0);

    let v = run(&["verify", "--input", g.to_str().unwrap(), "--matching", out.to_str().unwrap(), "--json"]);
    assert_eq!(v.status.code(), Some(0));
    let v = json(&v);
    assert_eq!(v["feasible"], Value::Bool(true));
    assert_eq!(v["optimum"].as_f64().unwrap(), 10.0);
}

#[test]
fn solve_is_reproducible_from_the_command_line() {
    let (_dir, g) = graph_file();
    let args = ["solve", "--input", g.to_str().unwrap(), "--seed", "7", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn verify_rejects_overfull_vertices() {
    let (dir, g) = graph_file();
    let m = write(dir.path(), "m.json", "[[0, 1, 1], [0, 2, 1]]");
    let o = run(&["verify", "--input", g.to_str().unwrap(), "--matching", m.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["feasible"], Value::Bool(false));
}

#[test]
fn capacities_file_is_respected() {
    let (dir, g) = graph_file();
    let b = write(dir.path(), "b.txt", "0 2\n2 2\n");
    let m = write(dir.path(), "m.json", "[[0, 1, 1], [0, 2, 1], [2, 3, 1]]");
    let o = run(&["verify", "--input", g.to_str().unwrap(), "--b", b.to_str().unwrap(), "--matching", m.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["weight"].as_f64().unwrap(), 12.0);
}

#[test]
fn sparsify_outputs_edges_and_stats() {
    let (_dir, g) = graph_file();
    let o = run(&["sparsify", "--input", g.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["edges"].is_array());
    assert_eq!(v["stats"]["rounds"].as_u64(), Some(1));

    let o = run(&["sparsify", "--input", g.to_str().unwrap(), "--deferred", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["stats"]["edges_stored"].as_u64().unwrap() > 0);
}

#[test]
fn stats_reports_sizes() {
    let (_dir, g) = graph_file();
    let o = run(&["stats", "--input", g.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["n"].as_u64(), Some(4));
    assert_eq!(v["m"].as_u64(), Some(5));
    assert_eq!(v["optimum"].as_f64(), Some(10.0));
}

#[test]
fn bad_inputs_exit_with_usage_status() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(run(&["solve", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    let looped = write(dir.path(), "loop.txt", "0 0 1\n");
    assert_eq!(run(&["solve", "--input", looped.to_str().unwrap()]).status.code(), Some(2));
    let neg = write(dir.path(), "neg.txt", "0 1 -3\n");
    assert_eq!(run(&["stats", "--input", neg.to_str().unwrap()]).status.code(), Some(2));
    let (_d, g) = graph_file();
    assert_eq!(run(&["solve", "--input", g.to_str().unwrap(), "--epsilon", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
