use std::process::{Command, Output};

use serde_json::Value;

const SURFACE: &str = r#"{"type":"amalgam","rankA":2,"rankB":2,"wA":"abAB","wB":"xyXY"}"#;
const MODULAR: &str = r#"{"generators":[{"name":"r","image":[2,3,4,5,0,1]},{"name":"s","image":[3,4,5,0,1,2]}],"relators":["rrr","ss"],"q_size":6}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitfree")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn reduce_and_primitive() {
    let out = run(&["reduce", "--word", "abBA"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["word"], "");
    assert_eq!(v["schema"], "csl/1");

    let v = json(&run(&["primitive", "--rank", "2", "--word", "aab"]));
    assert_eq!(v["primitive"], true);
    assert!(!v["moves"].as_array().unwrap().is_empty());
    assert_eq!(json(&run(&["primitive", "--word", "abAB"]))["primitive"], false);
    assert_eq!(json(&run(&["basic", "--word", "a", "--word", "ab"]))["basic"], true);
    assert_eq!(json(&run(&["basic", "--word", "a", "--word", "bab"]))["basic"], false);
}

#[test]
fn minimize_and_graphs() {
    let v = json(&run(&["minimize", "--word", "aab", "--word", "abAB"]));
    assert_eq!(v["rank"], 2);
    assert!(v["length"].as_u64().unwrap() <= 7);

    let out = run(&["wh-graph", "--word", "abAB", "--format", "dot"]);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("graph whitehead {"));
    assert_eq!(dot.matches(" -- ").count(), 4);

    let v = json(&run(&["gen-wh-graph", "--word", "abAB", "--vertex", "1", "--vertex", "a"]));
    assert_eq!(v["frontier"].as_array().unwrap().len(), 6);
    let out = run(&["gen-wh-graph", "--word", "abAB", "--ball", "1", "--format", "dot"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("graph generalized_whitehead {"));
}

#[test]
fn decide_exit_codes() {
    let out = run(&["decide", "--spec", SURFACE, "--radii", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["outcome"], "not_free");
    assert_eq!(v["schema"], "csl/1");
    let out = run(&["decide", "--spec", SURFACE, "--radii", "1", "--exit-verdict"]);
    assert_eq!(out.status.code(), Some(1));
    let free = r#"{"type":"hnn","rankA":2,"w1":"a","w2":"b"}"#;
    assert_eq!(run(&["decide", "--spec", free, "--exit-verdict"]).status.code(), Some(0));
}

#[test]
fn input_and_budget_errors() {
    assert_eq!(run(&["decide", "--spec", "{nope"]).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--word", "a1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["decide", "--spec", "/no/such/file.json"]).status.code(), Some(2));
    let out = run(&["detour", "--spec", SURFACE, "--radius", "3", "--point-budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("budget"));
}

#[test]
fn certificates_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["detour", "--spec", SURFACE, "--radius", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let cert_path = dir.path().join("cert.json");
    std::fs::write(&cert_path, &out.stdout).unwrap();
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, SURFACE).unwrap();
    let spec = spec_path.to_str().unwrap();
    let v = json(&run(&["verify", "--spec", spec, "--certificate", cert_path.to_str().unwrap()]));
    assert_eq!(v["valid"], true);

    let mut cert = json(&out);
    cert["tPlus"] = (cert["tPlus"].as_i64().unwrap() + 1).into();
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, cert.to_string()).unwrap();
    let v = json(&run(&["verify", "--spec", spec, "--certificate", bad_path.to_str().unwrap()]));
    assert_eq!(v["valid"], false);

    let verdict = run(&["decide", "--spec", SURFACE, "--radii", "1"]);
    let verdict_path = dir.path().join("verdict.json");
    std::fs::write(&verdict_path, &verdict.stdout).unwrap();
    let v = json(&run(&["verify", "--spec", spec, "--verdict", verdict_path.to_str().unwrap()]));
    assert_eq!(v["valid"], true);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["decide", "--spec", SURFACE, "--radii", "1,2"]);
    let b = run(&["decide", "--spec", SURFACE, "--radii", "1,2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn virtually_free_commands() {
    let v = json(&run(&["rs-kernel", "--presentation", MODULAR]));
    assert_eq!(v["rank"], 2);
    assert_eq!(v["eulerRank"], 2);
    let v = json(&run(&["lift", "--presentation", MODULAR, "--element", "sr"]));
    assert_eq!(v["order"], 6);
    let v = json(&run(&["factor", "--presentation", MODULAR, "--element", "sr"]));
    assert_eq!(v["factor"], false);
    let v = json(&run(&["commensurator", "--presentation", MODULAR, "--element", "srsr"]));
    assert!(v["index"].as_u64().unwrap() >= 2);
    let out = run(&["lift", "--presentation", MODULAR, "--element", "rr"]);
    assert_eq!(out.status.code(), Some(2));

    let hnn = format!(r#"{{"type":"hnn","A":{MODULAR},"c1":"sr","c2":"rs"}}"#);
    let out = run(&["decide-vf", "--spec", &hnn, "--exit-verdict"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["outcome"], "not_virtually_free");
    assert_eq!(v["evidence"]["kind"], "baumslag_solitar");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verdict.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let v = json(&run(&["verify", "--spec", &hnn, "--verdict", path.to_str().unwrap()]));
    assert_eq!(v["valid"], true);
}

#[test]
fn ball_export() {
    let spec = r#"{"type":"amalgam","rankA":2,"rankB":2,"wA":"a","wB":"xx"}"#;
    let out = run(&["ball", "--spec", spec, "--radius", "2"]);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("graph ball {"));
    assert!(dot.contains("style=dashed"));
    let v = json(&run(&["ball", "--spec", spec, "--radius", "0", "--format", "json"]));
    assert_eq!(v["points"], 1);
}
