use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn qfa_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfa")).current_dir(dir).args(args).output().unwrap()
}

fn qfa(args: &[&str]) -> Output {
    qfa_in(&data_dir(), args)
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = qfa(&all);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn trees_report_zero_four_point_delta() {
    let (code, v) = json(&["delta", "--input", "tree.g"]);
    assert_eq!(code, 0);
    assert_eq!(v["tool"], "qfa");
    assert_eq!(v["result"]["four_point_delta"], "0");
}

#[test]
fn identities_hold() {
    let (code, v) = json(&["identities", "--n", "4", "--lambda-max", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["failures"], 0);
}

#[test]
fn decomposed_word_evaluates_back_to_the_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let word = tmp.path().join("w.txt");
    let word = word.to_str().unwrap();
    let (code, dec) = json(&["decompose", "--input", "m.mat", "--word-out", word]);
    assert_eq!(code, 0);
    let (code, ev) = json(&["identities", "--eval", word]);
    assert_eq!(code, 0);
    assert_eq!(ev["result"]["matrix"], dec["result"]["input"]);
    assert_eq!(ev["result"]["det"], "1");
}

#[test]
fn malformed_input_names_file_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.g"), "graph 3\n0 1\n1 x\n").unwrap();
    let out = qfa_in(tmp.path(), &["delta", "--input", "bad.g"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.g:3"), "{}", stderr(&out));
}

#[test]
fn missing_file_and_unknown_subcommand_exit_one() {
    assert_eq!(qfa(&["delta", "--input", "nope.g"]).status.code(), Some(1));
    assert_eq!(qfa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qfa(&["delta"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(qfa(&["--help"]).status.code(), Some(0));
    let out = qfa(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn hyperbolic_generator_is_refused() {
    let (code, v) = json(&["qfa-cert", "--input", "translation.json", "--tuple", "a;b"]);
    assert_eq!(code, 2);
    assert_eq!(v["refusal"]["code"], "non_elliptic_generator");
    assert_eq!(v["refusal"]["offending"]["generator"], "b");
    assert!(v.get("result").is_none());
}

#[test]
fn elliptic_tuple_is_certified() {
    let (code, v) = json(&["qfa-cert", "--input", "stars.json", "--tuple", "a;b"]);
    assert_eq!(code, 0);
    assert!(v["result"].is_object());
}

#[test]
fn shared_end_is_refused() {
    let (code, v) = json(&["pingpong", "--input", "f2_ball.g", "--a", "f2_a.perm", "--b", "f2_a.perm"]);
    assert_eq!(code, 2);
    assert_eq!(v["refusal"]["code"], "shared_end");
}

#[test]
fn out_writes_the_report_to_a_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("report.json");
    let out = qfa(&["--json", "--out", path.to_str().unwrap(), "bushy", "--input", "f2_ball.g", "--b", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["subcommand"], "bushy");
    assert!(!v["config"]["argv"].as_array().unwrap().iter().any(|a| a == "--out"));
}

#[test]
fn text_and_json_agree_on_rationals() {
    let text = String::from_utf8(qfa(&["straighten", "--input", "caterpillar.g", "--map", "caterpillar.map"]).stdout).unwrap();
    let (_, v) = json(&["straighten", "--input", "caterpillar.g", "--map", "caterpillar.map"]);
    let eps = v["result"]["epsilon"].as_str().unwrap();
    assert!(text.lines().any(|l| l == format!("result.epsilon: {eps}")), "{text}");
}

#[test]
fn seeded_output_is_reproducible() {
    let args = ["decompose", "--random-length", "20", "--seed", "7", "--json"];
    assert_eq!(qfa(&args).stdout, qfa(&args).stdout);
    let (_, a) = json(&["decompose", "--random-length", "20", "--seed", "7"]);
    let (_, b) = json(&["decompose", "--random-length", "20", "--seed", "8"]);
    assert_ne!(a["result"], b["result"]);
}
