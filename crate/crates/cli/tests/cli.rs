//! End-to-end tests of the binary: exit-code contract, JSON outputs,
//! and composition of the commands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treejump"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(!output.stdout.is_empty(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treejump-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analyze_reports_exact_tables() {
    let out = run(&[
        "analyze",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["green_diag"]["0"], "3/2");
    assert_eq!(doc["green_diag"]["1"], "5/4");
    assert_eq!(doc["weight"]["1"], "3/2");
    assert_eq!(doc["nu_root"]["3"], "1/4");
    // the report is a flat array of identity entries with both sides
    let entries = doc["report"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["pass"] == true));
    assert!(entries.iter().any(|e| e["identity"] == "green-diag-sum" && e["lhs"] == "3/2"));
}

#[test]
fn analyze_rejects_bad_walks_with_exit_4() {
    let dir = tmp_dir("badwalk");
    let bad = dir.join("bad_walk.json");
    std::fs::write(&bad, r#"{ "p": { "0": { "1": "1/3", "2": "1/3" },
        "1": { "0": "1/3", "3": "1/3", "4": "1/3" },
        "2": { "0": "1/3", "5": "1/3", "6": "1/3" } } }"#)
        .unwrap();
    let out = run(&[
        "analyze",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sums to"), "{err}");
}

#[test]
fn analyze_rejects_id_mismatch_with_exit_4() {
    // walk references vertices outside the tree
    let dir = tmp_dir("mismatch");
    let bad = dir.join("mismatch_walk.json");
    std::fs::write(&bad, r#"{ "p": { "0": { "1": "1/2", "9": "1/2" } } }"#).unwrap();
    let out = run(&[
        "analyze",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_json_is_exit_2() {
    let dir = tmp_dir("parse");
    let bad = dir.join("broken.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&[
        "analyze",
        "--tree",
        bad.to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    // missing file is also a read/parse failure
    let out = run(&["build-from-metric", dir.join("nothere.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_from_metric_emits_tree_and_labels() {
    let dir = tmp_dir("metric");
    let tree_out = dir.join("tree.json");
    let phi_out = dir.join("phi.json");
    let out = run(&[
        "build-from-metric",
        data("b2_space.json").to_str().unwrap(),
        "--out-tree",
        tree_out.to_str().unwrap(),
        "--out-phi",
        phi_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["phi"]["0"], "3/2");
    assert_eq!(doc["leaves"].as_object().unwrap().len(), 4);
    assert!(tree_out.exists() && phi_out.exists());
    // emitted files feed straight back into other commands: analyze the
    // simple walk on the rebuilt tree shape is out of scope here, but the
    // tree file must parse
    let tree_text = std::fs::read_to_string(&tree_out).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&tree_text).is_ok());
}

#[test]
fn build_from_metric_violation_is_exit_3_with_triple() {
    let out = run(&["build-from-metric", data("bad_space.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(a, b, c)"), "offending triple not named: {err}");
}

#[test]
fn dualize_roundtrip_through_files() {
    let dir = tmp_dir("dualize");
    let phi = dir.join("phi.json");
    let mu = dir.join("mu.json");
    let out = run(&[
        "dualize",
        "walk-to-process",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
        "--out-phi",
        phi.to_str().unwrap(),
        "--out-mu",
        mu.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["phi"]["0"], "3/2");
    assert_eq!(doc["mu"]["3"], "1/4");
    // back through process-to-walk: C = 1 and the same walk
    let out = run(&[
        "dualize",
        "process-to-walk",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        phi.to_str().unwrap(),
        "--mu",
        mu.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["c"], "1");
    assert_eq!(doc["walk"]["p"]["0"]["1"], "1/2");
    assert_eq!(doc["walk"]["p"]["1"]["0"], "1/3");
}

#[test]
fn dualize_rejects_non_decreasing_phi() {
    let dir = tmp_dir("badphi");
    let phi = dir.join("phi.json");
    std::fs::write(&phi, r#"{ "0": "1/2", "1": "1/2", "2": "1/2" }"#).unwrap();
    let out = run(&[
        "dualize",
        "process-to-walk",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        phi.to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn check_passes_and_self_test_fails() {
    let out = run(&[
        "check",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let suites: Vec<&str> =
        doc.as_array().unwrap().iter().map(|r| r["theorem"].as_str().unwrap()).collect();
    assert!(suites.contains(&"doob-naim"));
    assert!(suites.contains(&"theorem1"));
    assert!(suites.contains(&"invariance"));
    assert!(suites.contains(&"kernel-identities"));
    assert!(suites.contains(&"roundtrip"));
    // harness self-test: a corrupted Green table must fail with exit 1
    let out = run(&[
        "check",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
        "--corrupt-green",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    let failures: usize =
        doc.as_array().unwrap().iter().map(|r| r["failures"].as_array().unwrap().len()).sum();
    assert!(failures > 0);
}

#[test]
fn check_single_suite_selection() {
    let out = run(&[
        "check",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
        "--suite",
        "doob-naim",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc.as_array().unwrap().len(), 1);
    assert_eq!(doc[0]["theorem"], "doob-naim");
}

#[test]
fn check_composes_with_dualize_output() {
    // dualize(process-to-walk) then check on the produced walk: exit 0
    let dir = tmp_dir("compose");
    let walk = dir.join("walk.json");
    let out = run(&[
        "dualize",
        "process-to-walk",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--out-walk",
        walk.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "check",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        walk.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn semigroup_exact_and_float_modes() {
    let out = run(&[
        "semigroup",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--sigma",
        data("sigma_table.json").to_str().unwrap(),
        "--t",
        "1",
        "--t",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["matrices"][0]["operator"]["entries"][0][0], "1/2");
    assert_eq!(doc["semigroup_residuals"][0]["residual"], 0.0);
    // float mode with the standard law, residual within 1e-12
    let out = run(&[
        "semigroup",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--sigma",
        data("sigma_standard.json").to_str().unwrap(),
        "--t",
        "1",
        "--t",
        "5/2",
        "--mode",
        "float",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let residual = doc["semigroup_residuals"][0]["residual"].as_f64().unwrap();
    assert!(residual <= 1e-12);
    let row = doc["matrices"][0]["operator"]["entries"][0].as_array().unwrap();
    let sum: f64 = row.iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() <= 1e-12);
}

#[test]
fn semigroup_rejects_degenerate_sigma_with_exit_4() {
    let dir = tmp_dir("badsigma");
    let sigma = dir.join("sigma.json");
    // CDF reaching 1 at the diameter
    std::fs::write(
        &sigma,
        r#"{ "kind": "table", "cdf": [["1/2", "1/2"], ["3/2", "1"]] }"#,
    )
    .unwrap();
    let out = run(&[
        "semigroup",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--sigma",
        sigma.to_str().unwrap(),
        "--t",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // non-strict CDF across the radius set is also an eq-sigma violation
    std::fs::write(
        &sigma,
        r#"{ "kind": "table", "cdf": [["1/2", "1/2"], ["3/2", "1/2"]] }"#,
    )
    .unwrap();
    let out = run(&[
        "semigroup",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--sigma",
        sigma.to_str().unwrap(),
        "--t",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_walk_meets_bound_and_rejects_bad_config() {
    let out = run(&[
        "simulate",
        "walk",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
        "--start",
        "0",
        "--seed",
        "42",
        "--trials",
        "20000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert!(doc["tv"].as_f64().unwrap() <= doc["bound"].as_f64().unwrap());
    assert_eq!(doc["exact"]["3"], 0.25);
    // zero trials: invalid config
    let out = run(&[
        "simulate",
        "walk",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
        "--start",
        "0",
        "--trials",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_jump_with_defocused_sigma_lands_on_mu() {
    let dir = tmp_dir("jumpsim");
    let sigma = dir.join("sigma.json");
    // all mass above the diameter: each step averages over everything
    std::fs::write(
        &sigma,
        r#"{ "kind": "table", "cdf": [["1/2", "0"], ["3/2", "0"]] }"#,
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "jump",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--phi",
        data("b2_phi.json").to_str().unwrap(),
        "--mu",
        data("b2_mu.json").to_str().unwrap(),
        "--sigma",
        sigma.to_str().unwrap(),
        "--start",
        "3",
        "--seed",
        "9",
        "--trials",
        "20000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    for leaf in ["3", "4", "5", "6"] {
        assert!((doc["exact"][leaf].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
    assert!(doc["tv"].as_f64().unwrap() <= doc["bound"].as_f64().unwrap());
}

#[test]
fn emitted_rationals_roundtrip_unchanged() {
    // everything analyze emits parses back to the same canonical string
    let out = run(&[
        "analyze",
        "--tree",
        data("b2_tree.json").to_str().unwrap(),
        "--walk",
        data("b2_walk.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    for table in ["hit_up", "hit_down", "green_diag", "weight", "conductance", "nu_root"] {
        for (_, v) in doc[table].as_object().unwrap() {
            let s = v.as_str().unwrap();
            let parsed = treejump::ratio::parse_rat(s).unwrap();
            assert_eq!(treejump::ratio::fmt_rat(&parsed), s);
        }
    }
}

#[test]
fn deterministic_simulation_output() {
    let tree = data("b2_tree.json");
    let walk = data("b2_walk.json");
    let args = [
        "simulate",
        "walk",
        "--tree",
        tree.to_str().unwrap(),
        "--walk",
        walk.to_str().unwrap(),
        "--start",
        "0",
        "--seed",
        "1234",
        "--trials",
        "5000",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}
