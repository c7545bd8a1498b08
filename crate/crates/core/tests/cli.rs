//! End-to-end runs of the `faspc` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use faspc::cli::{Outcome, RunReport};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn faspc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faspc")).args(args).output().expect("spawn faspc")
}

fn report(args: &[&str]) -> (i32, RunReport) {
    let out = faspc(args);
    let text = String::from_utf8(out.stdout).unwrap();
    let r: RunReport = serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), r)
}

#[test]
fn social_network_degrees() {
    let f = fixture("social.fasp");
    let (code, r) = report(&["solve", "--check", "--json", f.to_str().unwrap()]);
    assert_eq!(code, 10);
    assert_eq!(r.outcome, Outcome::Stable);
    let m = r.model.unwrap();
    assert_eq!(m["distrust(alice,bob,2)"], "1/5");
    assert_eq!(m["trust(alice,bob,2)"], "3/5");
    assert_eq!(r.verification.unwrap().minimal, "true");
}

#[test]
fn text_output_lists_atoms() {
    let out = faspc(&["solve", fixture("ocomp.fasp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "p = 1/10\nq = 1/10\n");
}

#[test]
fn incoherent_exit_code() {
    let out = faspc(&["solve", fixture("incoherent.fasp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(20));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "INCOHERENT\n");
}

#[test]
fn every_strategy_on_pi2_yields_a_checked_model() {
    let f = fixture("pi2.fasp");
    for s in ["auto", "smt", "rcomp"] {
        let (code, r) = report(&["solve", "--check", "--json", "--strategy", s, f.to_str().unwrap()]);
        assert_eq!(code, 10, "strategy {s}");
        assert_eq!(r.verification.unwrap().minimal, "true");
    }
}

#[test]
fn forced_strategy_precondition_is_a_usage_error() {
    let out = faspc(&["solve", "--strategy", "ocomp", fixture("recursive_sum.fasp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[strategy]"));
}

#[test]
fn recursive_sum_reaches_one() {
    let (code, r) = report(&["solve", "--json", fixture("recursive_sum.fasp").to_str().unwrap()]);
    assert_eq!(code, 10);
    assert_eq!(r.model.unwrap()["p"], "1");
}

#[test]
fn report_json_round_trips() {
    let out = faspc(&["solve", "--json", fixture("pi2.fasp").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let r: RunReport = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), text.trim());
}

#[test]
fn classify_prints_json() {
    let out = faspc(&["solve", "--classify", fixture("social.fasp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["acyclic"], true);
}

#[test]
fn print_smt_and_dump_rewritten() {
    let f = fixture("ocomp.fasp");
    let out = faspc(&["solve", "--print-smt", f.to_str().unwrap()]);
    let script = String::from_utf8(out.stdout).unwrap();
    assert!(script.starts_with("(set-option :produce-models true)"));
    assert!(script.contains("(check-sat)"));
    let out = faspc(&["solve", "--dump-rewritten", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("q :- p."));
}

#[test]
fn aux_atoms_hidden_by_default() {
    let dir = std::env::temp_dir().join(format!("faspc-aux-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("aux.fasp");
    std::fs::write(&f, "p + q :- 1.\nr :- not (p * q).\n").unwrap();
    let (_, plain) = report(&["solve", "--json", f.to_str().unwrap()]);
    assert!(plain.model.unwrap().keys().all(|k| !k.starts_with("__")));
    let (_, full) = report(&["solve", "--json", "--show-aux", f.to_str().unwrap()]);
    assert!(full.model.unwrap().keys().any(|k| k.starts_with("__")));
}

#[test]
fn oracle_answers_on_the_grid() {
    let dir = std::env::temp_dir().join(format!("faspc-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("odd.fasp");
    std::fs::write(&f, "a :- not a.\n").unwrap();
    let (code, r) = report(&["solve", "--json", "--oracle", "2", f.to_str().unwrap()]);
    assert_eq!(code, 10);
    assert_eq!(r.strategy, None);
    assert_eq!(r.model.unwrap()["a"], "1/2");
    assert_eq!(faspc(&["solve", "--oracle", "3", f.to_str().unwrap()]).status.code(), Some(20));
}

#[test]
fn broken_solver_is_unknown_or_error() {
    let out = faspc(&["solve", "--solver", "false", fixture("pi2.fasp").to_str().unwrap()]);
    let code = out.status.code().unwrap();
    assert!(code == 30 || code == 2, "exit {code}");
}

#[test]
fn parse_errors_exit_with_one() {
    let dir = std::env::temp_dir().join(format!("faspc-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.fasp");
    std::fs::write(&f, "p :- (q.\n").unwrap();
    let out = faspc(&["solve", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[parse]"));
}

#[test]
fn generated_instances_solve() {
    let dir = std::env::temp_dir().join(format!("faspc-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("strat.fasp");
    let out = faspc(&["gen", "stratified", "--n", "8", "--seed", "5", "-o", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (code, r) = report(&["solve", "--check", "--json", f.to_str().unwrap()]);
    assert_eq!(code, 10);
    assert_eq!(r.strategy, Some(faspc::translate::Strategy::Rcomp));
}
