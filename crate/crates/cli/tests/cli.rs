use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn model(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    p.to_str().unwrap().to_string()
}

/// Runs the binary and returns (exit code, stdout, stderr).
fn adverse(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_adverse")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, err) = adverse(&all);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

#[test]
fn exit_codes_follow_verdicts() {
    let capped = model("tns_capped.gts");
    let cases = [
        (vec!["--query", "one_step"], 0),
        (vec!["--query", "zero_step"], 1),
        (vec!["--query", "last_minute"], 0),
        (vec!["--kind", "plain", "--pre", "NoBlocked", "--post", "NoBlocked", "--init", "G0"], 1),
        (vec!["--query", "one_step", "--max-states", "2"], 2),
    ];
    for (extra, code) in cases {
        let mut args = vec!["check", "--model", &capped];
        args.extend(extra.iter().copied());
        let (c, v) = json(&args);
        assert_eq!(c, code, "{extra:?}");
        let verdict = ["HOLDS", "VIOLATED", "UNKNOWN"][code as usize];
        assert_eq!(v["verdict"], verdict);
    }
    let b = model("tns_b.gts");
    assert_eq!(adverse(&["check", "--model", &b, "--query", "weak_one_step"]).0, 0);
    assert_eq!(adverse(&["check", "--model", &b, "--query", "two_step"]).0, 1);
    let unbounded = model("tns.gts");
    assert_eq!(adverse(&["check", "--model", &unbounded, "--query", "last_minute", "--max-graph-size", "12"]).0, 2);
}

#[test]
fn report_shape() {
    let (_, v) = json(&["check", "--model", &model("tns_capped.gts"), "--query", "zero_step", "--method", "both"]);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["verdict", "kind", "k", "method", "states", "complete", "witness", "agreement", "defect", "note", "scope", "loop_start"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["kind"], "k-step");
    assert_eq!(v["k"], 0);
    assert_eq!(v["method"], "both");
    assert_eq!(v["agreement"], true);
    assert_eq!(v["defect"], false);
    let w = v["witness"].as_array().unwrap();
    assert!(w.len() >= 2);
    assert_eq!(w[0]["role"], "init");
    assert!(w[0]["rule"].is_null());
    assert!(w.iter().any(|s| s["role"] == "environment" && s["rule"] == "Block"));
    for s in w {
        assert!(s["graph"]["nodes"].is_array());
        assert!(s["graph"]["edges"].is_array());
    }
    let (_, h) = json(&["check", "--model", &model("tns_capped.gts"), "--query", "one_step"]);
    assert!(h["witness"].as_array().unwrap().is_empty());
    assert!(h["scope"].as_str().unwrap().contains("initial graphs"));
}

#[test]
fn text_report() {
    let (code, out, _) = adverse(&["check", "--model", &model("tns_capped.gts"), "--query", "zero_step"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("verdict: VIOLATED\n"), "{out}");
    assert!(out.contains("Block"));
}

#[test]
fn formulas() {
    let m = model("tns_capped.gts");
    for f in ["pcs", "recover1", "weak1"] {
        let (code, v) = json(&["check", "--model", &m, "--formula", f, "--init", "G0"]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(v["kind"], format!("formula {f}"));
    }
    let (code, _, err) = adverse(&["check", "--model", &m, "--formula", "nope", "--init", "G0"]);
    assert_eq!(code, 65, "{err}");
    let (code, _, _) = adverse(&["check", "--model", &m, "--formula", "pcs", "--kind", "plain"]);
    assert_eq!(code, 64);
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["check", "--model", "tns_b.gts", "--query", "two_step", "--format", "json"],
        vec!["check", "--model", "tns_capped.gts", "--query", "zero_step", "--method", "both"],
        vec!["explore", "--model", "tns_b.gts", "--init", "G0", "--format", "json"],
        vec!["simulate", "--model", "tns_b.gts", "--init", "G0", "--seed", "7"],
        vec!["dot", "--model", "tns_capped.gts", "--init", "G0"],
    ] {
        let path = model(args[2]);
        let mut a = args.clone();
        a[2] = &path;
        let first = adverse(&a);
        assert!(first.0 <= 2, "{args:?}: {}", first.2);
        assert_eq!(first, adverse(&a), "{args:?}");
    }
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(adverse(&[]).0, 64);
    assert_eq!(adverse(&["frobnicate"]).0, 64);
    assert_eq!(adverse(&["check"]).0, 64);
    let (code, _, err) = adverse(&["check", "--model", "/nonexistent/model.gts", "--query", "q"]);
    assert_eq!(code, 66, "{err}");
    let m = model("tns_capped.gts");
    assert_eq!(adverse(&["check", "--model", &m, "--query", "missing"]).0, 65);
    assert_eq!(adverse(&["check", "--model", &m, "--query", "one_step", "--kind", "sideways"]).0, 64);
    assert_eq!(adverse(&["check", "--model", &m, "--query", "one_step", "--kind", "plain", "--method", "reduction"]).0, 64);
    let dir = std::env::temp_dir().join(format!("adverse-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.gts");
    std::fs::write(&bad, "graph G {").unwrap();
    assert_eq!(adverse(&["check", "--model", bad.to_str().unwrap(), "--query", "q"]).0, 65);
    std::fs::remove_dir_all(&dir).unwrap();
    let (code, out, _) = adverse(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("check"));
}

#[test]
fn explore_and_dot() {
    let m = model("tns_capped.gts");
    let (code, v) = json(&["explore", "--model", &m, "--init", "G0"]);
    assert_eq!(code, 0);
    assert_eq!(v["states"], 4);
    assert_eq!(v["complete"], true);
    assert_eq!(v["rules"].as_array().unwrap().len(), 5);
    let (_, a) = json(&["explore", "--model", &m, "--init", "G0", "--annotated"]);
    assert_eq!(a["rules"].as_array().unwrap().len(), 9);
    let (code, v) = json(&["explore", "--model", &model("tns.gts"), "--init", "G0", "--max-states", "10"]);
    assert_eq!(code, 2);
    assert_eq!(v["truncation"], "max-states");

    let (code, dot, _) = adverse(&["dot", "--model", &m, "--init", "G0"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph"));
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    assert_eq!(nodes, 4, "{dot}");

    let (code, run) = json(&["simulate", "--model", &m, "--init", "G0", "--steps", "6", "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(run["steps"].as_array().unwrap().len(), 7);
}
