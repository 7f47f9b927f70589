use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpl")).env_remove("QPL_CACHE_DIR").args(args).output().expect("run qpl")
}

fn qpl_json(args: &[&str]) -> Value {
    let out = qpl(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json")
}

fn coefficient_values(doc: &Value) -> Vec<(Vec<u64>, String)> {
    doc["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["d"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect(), c["value"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn genus1_h1h2_vanishes_through_cap4() {
    let doc = qpl_json(&["--json", "invariant", "--n", "2", "--genus", "1", "--insertions", "0:11", "--cap", "4"]);
    assert_eq!(doc["schema"], 1);
    let vals = coefficient_values(&doc);
    assert_eq!(vals.len(), 15);
    assert!(vals.iter().all(|(_, v)| v == "0/1"));
    // graded-lex: total degree first, then descending in the first variable
    assert_eq!(vals[1].0, vec![1, 0]);
    assert_eq!(vals[2].0, vec![0, 1]);
    assert_eq!(doc["meta"]["convention"], "proof");
}

#[test]
fn three_points_through_a_bidegree_one_one_curve() {
    let doc = qpl_json(&["--json", "invariant", "--n", "2", "--genus", "0", "--insertions", "0:11;0:11;0:11", "--cap", "2"]);
    let c = doc["coefficients"].as_array().unwrap().iter().find(|c| c["d"] == serde_json::json!([1, 1])).unwrap().clone();
    assert_eq!(c["value"], "1/1");
    assert_eq!(c["vdim_zero"], true);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        vec!["invariant", "--n", "9", "--insertions", "0:1"],
        vec!["invariant", "--n", "1", "--genus", "3", "--insertions", "0:1"],
        vec!["invariant", "--n", "1", "--insertions", "0:1", "--cap", "9"],
        vec!["invariant", "--n", "1", "--insertions", "bogus"],
        vec!["invariant", "--n", "1", "--insertions", "0:1", "--mode", "fast"],
        vec!["invariant", "--n", "1", "--genus", "0", "--insertions", "0:1"],
        vec!["verify", "nonsense"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qpl(&args).status.code(), Some(2), "{args:?}");
    }
}

fn run_cached(dir: &Path) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_qpl"))
        .env("QPL_CACHE_DIR", dir)
        .args(["--json", "invariant", "--n", "1", "--genus", "1", "--insertions", "0:1", "--cap", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cold_then_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cold = run_cached(dir.path());
    let warm = run_cached(dir.path());
    assert_eq!(cold["meta"]["cache_hits"], 0);
    assert!(warm["meta"]["cache_hits"].as_u64().unwrap() > 0);
    assert_eq!(cold["coefficients"], warm["coefficients"]);
    assert_eq!(cold["params"], warm["params"]);

    let d = dir.path().to_str().unwrap();
    let stats = qpl_json(&["--json", "--cache-dir", d, "cache", "stats"]);
    assert!(stats["stats"]["entries"].as_u64().unwrap() >= 2);
    assert_eq!(stats["stats"]["invalid"], 0);
    let list = qpl_json(&["--json", "--cache-dir", d, "cache", "list"]);
    assert!(list["entries"].as_array().unwrap().iter().any(|e| e["module"] == "invariant"));
}

#[test]
fn corrupt_entries_are_ignored_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cold = run_cached(dir.path());
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        std::fs::write(&p, &text[..text.len() / 2]).unwrap();
    }
    let out = Command::new(env!("CARGO_BIN_EXE_qpl"))
        .env("QPL_CACHE_DIR", dir.path())
        .args(["--json", "invariant", "--n", "1", "--genus", "1", "--insertions", "0:1", "--cap", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: ignoring cache entry"));
    let again: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(again["meta"]["cache_hits"], 0);
    assert_eq!(again["coefficients"], cold["coefficients"]);
    // the recomputed entries replaced the corrupt ones
    assert!(run_cached(dir.path())["meta"]["cache_hits"].as_u64().unwrap() > 0);
}

#[test]
fn cache_clear_empties_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    run_cached(dir.path());
    let d = dir.path().to_str().unwrap();
    let cleared = qpl_json(&["--json", "--cache-dir", d, "cache", "clear"]);
    assert!(cleared["removed"].as_u64().unwrap() >= 2);
    assert_eq!(qpl_json(&["--json", "--cache-dir", d, "cache", "list"])["entries"], serde_json::json!([]));
}

#[test]
fn cache_commands_need_a_directory() {
    assert_eq!(qpl(&["cache", "stats"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qpl.conf");
    std::fs::write(&cfg, "# defaults\nn = 2\ngenus = 0\ninsertions = 0:11;0:11;0:11\ncap = 2\n").unwrap();
    let c = cfg.to_str().unwrap();
    let doc = qpl_json(&["--json", "--config", c, "invariant"]);
    assert_eq!(doc["params"]["n"], 2);
    assert_eq!(doc["coefficients"].as_array().unwrap().len(), 6);
    let doc = qpl_json(&["--json", "--config", c, "invariant", "--cap", "1"]);
    assert_eq!(doc["coefficients"].as_array().unwrap().len(), 3);
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(qpl(&["--config", c, "invariant"]).status.code(), Some(2));
}

#[test]
fn per_variable_caps() {
    let doc = qpl_json(&["--json", "invariant", "--n", "2", "--insertions", "0:11;0:11;0:11;0:11;0:11", "--caps", "2,1"]);
    assert_eq!(doc["params"]["caps"], serde_json::json!([2, 1]));
    let vals = coefficient_values(&doc);
    assert_eq!(vals.len(), 6);
    assert!(vals.contains(&(vec![2, 1], "1/1".to_string())));
}

#[test]
fn lambda_mode_reports_rationals_for_numbers() {
    let doc = qpl_json(&["--json", "invariant", "--n", "1", "--genus", "1", "--insertions", "0:1", "--cap", "1", "--mode", "lambda"]);
    assert_eq!(doc["params"]["mode"], "lambda");
    assert_eq!(doc["coefficients"][0]["value"], "-1/24");
}

#[test]
fn definition_convention_is_selectable() {
    let doc = qpl_json(&["--json", "invariant", "--n", "1", "--insertions", "0:1;0:1;0:1", "--cap", "1", "--edge-sign", "definition"]);
    assert_eq!(doc["meta"]["convention"], "definition");
}

#[test]
fn oracle_selects_the_proof_convention() {
    let doc = qpl_json(&["--json", "oracle", "--max-degree", "4"]);
    assert_eq!(doc["convention"], "proof");
    assert_eq!(doc["report"]["passed"], true);
}

#[test]
fn local_data_lists_every_fixed_point() {
    let doc = qpl_json(&["--json", "local-data", "--n", "2", "--cap", "1", "--depth", "1"]);
    let pts = doc["points"].as_array().unwrap();
    assert_eq!(pts.len(), 4);
    assert_eq!(pts[0]["rt"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_single_suite() {
    let out = qpl(&["verify", "moduli"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("== moduli: PASS"));
}
