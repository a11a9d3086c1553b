use std::process::{Command, Output};

fn frobq(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_frobq"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn full_run_is_reproducible() {
    let a = frobq(&["--suite", "all", "--seed", "11", "--no-timing"], &[]);
    let b = frobq(&["run", "--suite", "all", "--seed", "11", "--no-timing"], &[]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["version"], 1);
    assert_eq!(v["config"]["p"], 3);
    assert_eq!(v["summary"]["fail"], 0);
    let crits: std::collections::BTreeSet<u64> = v["results"].as_array().unwrap().iter().map(|r| r["criterion"].as_u64().unwrap()).collect();
    assert_eq!(crits.len(), 11);
}

#[test]
fn inapplicable_check_is_a_configuration_error() {
    let out = frobq(&["--p", "5", "--suite", "autgrp/char3"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p = 3"));
}

#[test]
fn memory_guard() {
    let out = frobq(&["--p", "7", "--n", "2"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_environment() {
    let out = frobq(&["--suite", "lie", "--p", "3"], &[("FROBQ_P", "5"), ("FROBQ_SEED", "4")]);
    let v = json(&out);
    assert_eq!(v["config"]["p"], 3);
    assert_eq!(v["config"]["seed"], 4);
    let out = frobq(&[], &[("FROBQ_SUITE", "c08.commutator"), ("FROBQ_P", "5")]);
    let v = json(&out);
    assert_eq!(v["results"][0]["note"], "21/22");
}

#[test]
fn markdown_report_to_file() {
    let path = std::env::temp_dir().join(format!("frobq-report-{}.md", std::process::id()));
    let out = frobq(&["--suite", "weyl", "--report", "markdown", "--out", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.contains("| 1 | weyl | `c01.relations` | pass |"));
    assert!(text.contains("fail 0"));
}

#[test]
fn eval_subcommand() {
    let out = frobq(&["eval", "(x1*y1)^3"], &[]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[1*h^2]*x1*y1");
    let out = frobq(&["eval", "--opposite", "[x1, y1]"], &[]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[1*h]");
    let out = frobq(&["eval", "x1^"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
