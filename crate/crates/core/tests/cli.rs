use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_spinlab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SPINLAB_SEED").output().expect("spawn spinlab")
}

fn schema_path(cmd: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{cmd}.schema.json"))
}

fn validated(cmd: &str, out: &Output) -> Value {
    assert!(out.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("json output");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(cmd)).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    if let Err(errs) = compiled.validate(&v) {
        let msgs: Vec<String> = errs.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{cmd} output violates schema: {msgs:?}");
    }
    v
}

struct Graphs {
    _dir: tempfile::TempDir,
    edge: String,
    c4: String,
    star: String,
}

fn graphs() -> Graphs {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    Graphs {
        edge: write("edge.txt", "2 1\n0 1\n"),
        c4: write("c4.txt", "4 4\n0 1\n1 2\n2 3\n0 3\n"),
        star: write("star.txt", "# star\n4 3\n0 1\n0 2\n0 3\n"),
        _dir: dir,
    }
}

#[test]
fn gap_of_edge_hardcore_is_a_quarter() {
    let g = graphs();
    let v = validated("gap", &run(&["gap", "--graph", &g.edge, "--model", "hardcore", "--lambda", "1", "--min-gap"]));
    assert!((v["gap"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["states"], 3);
    assert!((v["min_gap"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn every_subcommand_matches_its_schema() {
    let g = graphs();
    validated(
        "sample",
        &run(&["sample", "--graph", &g.c4, "--model", "ising", "--beta", "0.5", "--steps", "50", "--seed", "3", "--dyn", "field", "--theta", "0.4"]),
    );
    validated("gap", &run(&["gap", "--graph", &g.c4, "--beta", "0.3", "--gamma", "1.2", "--dyn", "block", "--ell", "2"]));
    validated("unique", &run(&["unique", "--beta", "0", "--gamma", "1", "--lambda", "1", "--delta-max", "4"]));
    validated("unique", &run(&["unique", "--beta", "0.5", "--gamma", "1", "--lambda", "1", "--infinite"]));
    validated("si", &run(&["si", "--graph", &g.star, "--model", "hardcore", "--lambda", "0.7", "--complete", "--random-vectors", "3"]));
    validated("saw", &run(&["saw", "--graph", &g.c4, "--model", "hardcore", "--pin", "2=-"]));
    validated("couple", &run(&["couple", "--graph", &g.star, "--model", "hardcore", "--lambda", "0.1"]));
    validated("couple", &run(&["couple", "--graph", &g.c4, "--model", "ising", "--beta", "0.6", "--magnetize"]));
    validated("limit", &run(&["limit", "--graph", &g.edge, "--model", "hardcore", "--ks", "2,8"]));
    validated("verify", &run(&["verify", "--suite", "1"]));
    validated("sweep", &run(&["sweep", "--nmax", "3", "--betas", "0.2", "--lambdas", "1"]));
}

#[test]
fn bad_theta_exits_one_with_message() {
    let g = graphs();
    let out = run(&["sample", "--graph", &g.c4, "--model", "hardcore", "--dyn", "field", "--theta", "1.5", "--steps", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta must lie in (0,1)"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["gap"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let g = graphs();
    // Sampling without a seed is refused.
    let out = run(&["sample", "--graph", &g.edge, "--model", "hardcore", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["gap", "--graph", "/nonexistent/graph.txt", "--model", "hardcore"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupted_oracle_exits_two() {
    let out = run(&["verify", "--suite", "1", "--corrupt-oracle"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn seeded_sampling_is_byte_identical() {
    let g = graphs();
    let args = ["sample", "--graph", &g.c4, "--model", "hardcore", "--lambda", "1.3", "--steps", "200", "--seed", "99", "--dyn", "block", "--ell", "2", "--csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_from_environment() {
    let g = graphs();
    let args = ["sample", "--graph", &g.edge, "--model", "hardcore", "--steps", "40", "--csv"];
    let env = Command::new(BIN).args(args).env("SPINLAB_SEED", "7").output().unwrap();
    let flag = run(&[&args[..], &["--seed", "7"]].concat());
    assert!(env.status.success());
    assert_eq!(env.stdout, flag.stdout);
}

#[test]
fn out_file_is_written() {
    let g = graphs();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("limit.csv");
    let out = run(&["limit", "--graph", &g.edge, "--model", "hardcore", "--ks", "2,64", "--csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let d2: f64 = rows[0][2].parse().unwrap();
    let d64: f64 = rows[1][2].parse().unwrap();
    assert!((d2 - 1.0 / 24.0).abs() < 1e-12);
    assert!((d64 - 1.0 / 1016.0).abs() < 1e-12);
    // No temporary files left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn saw_counts_and_dot() {
    let g = graphs();
    let v = validated("saw", &run(&["saw", "--graph", &g.c4, "--model", "hardcore"]));
    assert_eq!(v["nodes"], 9);
    assert_eq!(v["free_nodes"], 7);
    assert_eq!(v["depth"], 4);
    let dot = run(&["saw", "--graph", &g.c4, "--model", "hardcore", "--dot"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("->").count(), 8);
}

#[test]
fn unique_reports_hardcore_threshold() {
    let v = validated("unique", &run(&["unique", "--beta", "0", "--gamma", "1", "--lambda", "1.6875", "--delta-max", "4"]));
    assert!((v["lambda_c"].as_f64().unwrap() - 27.0 / 16.0).abs() < 1e-12);
    assert_eq!(v["boundary"], true);
}
