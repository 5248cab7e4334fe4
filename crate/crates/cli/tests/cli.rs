use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tensorconc"));
    c.env_remove("TENSORCONC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_CHECKS: &str = r#"{
  "geometry": {
    "moment_cases": [{"d": 4, "r": 2, "p": 2}],
    "samples": 2000, "contraction_samples": 500, "distance_terms": 2,
    "half_ball_dim": 4, "half_ball_p": [2, 4], "half_ball_t": [1.0], "half_ball_samples": 1000,
    "convexity_p": [2, 4], "convexity_dim": 4, "pairs": 200
  },
  "identities": {
    "dims": [2], "orders": [2], "p_list": [2, 3], "instances": 1, "series_count": 3, "series_p": [2], "max_terms": 2
  }
}"#;

const K4: &str = r#"{"d":4,"r":2,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#;

#[test]
fn norm_of_diag_plus_minus_one_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.json", r#"{"tensor":{"order":2,"dim":2,"entries":[1,0,0,-1]},"p":2}"#);
    let out = run(&["norm", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    assert_eq!(first.split_whitespace().collect::<Vec<_>>(), ["value", "1.0"]);
    let json = run(&["norm", "--config", &cfg, "--json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["value"].as_f64(), Some(1.0));
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn complete_graph_bound_from_a_referenced_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k4.json", K4);
    let cfg = write(dir.path(), "b.json", r#"{"hypergraph": "k4.json"}"#);
    let out = run(&["bound", "--name", "hypergraph", "--config", &cfg, "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want = 5f64.ln() * 3f64.sqrt() + 6f64.powf(0.25);
    assert!((v["value"].as_f64().unwrap() - want).abs() <= 1e-12 * want);
    assert_eq!(v["name"], "hypergraph");
}

#[test]
fn checks_output_is_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL_CHECKS);
    let a = run(&["checks", "--config", &cfg, "--seed", "7"]);
    let b = run(&["checks", "--config", &cfg, "--seed", "7", "--threads", "1"]);
    let c = bin()
        .args(["checks", "--config", &cfg, "--seed", "7"])
        .env("TENSORCONC_THREADS", "8")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let d = run(&["checks", "--config", &cfg, "--seed", "8"]);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn seed_flag_matches_the_config_seed() {
    let base = r#"{"model":{"kind":"iid_symmetric","d":3,"r":3},"p":3,"trials":4}"#;
    let mut child = bin()
        .args(["mc", "--config", "-", "--seed", "99"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(base.as_bytes()).unwrap();
    let by_flag = child.wait_with_output().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mc.json",
        r#"{"model":{"kind":"iid_symmetric","d":3,"r":3},"p":3,"trials":4,"master_seed":99}"#,
    );
    let by_config = run(&["mc", "--config", &cfg]);
    assert!(by_flag.status.success());
    assert_eq!(by_flag.stdout, by_config.stdout);
    let csv = String::from_utf8(by_flag.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,seed,value"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn exit_codes() {
    // Unknown field.
    let out = run(&["mc", "--set", "model.kind=iid_symmetric", "--set", "model.d=3", "--set", "model.r=2", "--set", "trails=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    // Missing file.
    assert_eq!(run(&["norm", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    // Unknown subcommand.
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // Size guard.
    let big = run(&["mc", "--set", "model.kind=iid_symmetric", "--set", "model.d=100", "--set", "model.r=5"]);
    assert_eq!(big.status.code(), Some(3));
    // A violated ratio cap is a failed property check.
    let capped = run(&[
        "sweep", "--set", "model.kind=iid_symmetric", "--set", "model.d=3", "--set", "model.r=2",
        "--set", "sweep=[3,4]", "--set", "trials=3", "--set", "ratio_cap=1e-9",
    ]);
    assert_eq!(capped.status.code(), Some(1));
    assert!(String::from_utf8(capped.stdout).unwrap().starts_with("d,mean"));
}

#[test]
fn rejected_inputs_never_touch_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    fs::write(&target, "previous\n").unwrap();
    let t = target.to_str().unwrap();
    let out = run(&["mc", "--set", "model.kind=nope", "--output", t]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&target).unwrap(), "previous\n");

    let fresh = dir.path().join("fresh.csv");
    let out = run(&["mc", "--set", "trials=0", "--set", "model.kind=iid_symmetric", "--set", "model.d=2", "--set", "model.r=2", "--output", fresh.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!fresh.exists());
    // Only the original file remains; no temporary is left behind.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);

    let ok = run(&["mc", "--set", "model.kind=iid_symmetric", "--set", "model.d=2", "--set", "model.r=2", "--set", "trials=2", "--output", t]);
    assert!(ok.status.success());
    assert!(ok.stdout.is_empty());
    assert!(fs::read_to_string(&target).unwrap().starts_with("trial,seed,value"));
}

#[test]
fn variance_and_other_bounds() {
    let out = run(&["variance", "--set", "series=[{\"order\":1,\"dim\":2,\"entries\":[1,0]},{\"order\":1,\"dim\":2,\"entries\":[0,1]}]", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sigma"][0].as_f64(), Some(1.0));
    assert!((v["sigma"][1].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);

    let holder = run(&["bound", "--name", "nck_holder", "--set", "degrees=[2,2,1,1]", "--set", "d=4", "--set", "p=4", "--json"]);
    let v: Value = serde_json::from_slice(&holder.stdout).unwrap();
    let want = 5f64.ln().sqrt() * 2.0 * 2f64.sqrt();
    assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-12 * want);

    let missing = run(&["bound", "--name", "matching"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_name = run(&["bound", "--name", "nonsense"]);
    assert_eq!(bad_name.status.code(), Some(2));
}
