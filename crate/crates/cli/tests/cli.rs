use std::process::{Command, Output};

use jsonschema::JSONSchema;
use k3cert_core::suite::Anchor;
use serde_json::Value;

const SCHEMA: &str = include_str!("../../../docs/report.schema.json");

fn k3cert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3cert"))
        .args(args)
        .env_remove("K3CERT_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn assert_valid(v: &Value) {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => vec![],
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations: {msgs:#?}");
}

#[test]
fn fermat_surface_passes() {
    let out = k3cert(&["check-surface", "--poly", "fermat", "-q"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_valid(&v);
    assert_eq!(v["details"]["surface"]["status"], "certified-nonsingular");
}

#[test]
fn singular_surface_exits_nonzero_with_witness() {
    let out = k3cert(&["check-surface", "--poly", "x0^4+x1^4+x2^4", "-q"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_valid(&v);
    assert_eq!(v["overall"], "fail");
    assert_eq!(v["details"]["surface"]["witness"]["coords"], serde_json::json!(["0", "0", "0", "1"]));
}

#[test]
fn parse_errors_are_structured() {
    let out = k3cert(&["check-surface", "--poly", "x0^4 + * x1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_valid(&v);
    assert_eq!(v["error"]["kind"], "parse");
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_poly_file_is_an_io_error() {
    let out = k3cert(&["check-surface", "--poly-file", "/nonexistent/quartic.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "io");
}

#[test]
fn poly_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.txt");
    let report = dir.path().join("r.json");
    std::fs::write(&input, "x0^4 + 2*x1^4 + 3*x2^4 + 5*x3^4\n").unwrap();
    let out = k3cert(&[
        "check-surface",
        "--poly-file",
        input.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
        "-q",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid(&v);
    assert_eq!(v["overall"], "pass");
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_k3cert"))
        .args(["check-hk", "--trials", "5", "-q"])
        .env("K3CERT_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["seed"], 77);
}

#[test]
fn every_subcommand_matches_schema() {
    let runs: [&[&str]; 6] = [
        &["check-omega", "--samples", "10"],
        &["check-hk", "--trials", "20"],
        &["verify-h"],
        &["bezout", "--curve1", "y*z - x^2", "--curve2", "y"],
        &["cde", "--poly", "fermat", "--sigma", "exp(i*pi/4)", "--numeric"],
        &["cde", "--poly", "fermat", "--sigma", "-3/4 + 2/5*i"],
    ];
    for args in runs {
        let out = k3cert(&[args, &["-q"]].concat());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_valid(&json(&out));
    }
}

#[test]
fn schema_anchor_vocabulary_matches_library() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let listed: Vec<String> = schema["definitions"]["anchor"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let ours: Vec<String> = Anchor::ALL.iter().map(|a| a.name()).collect();
    assert_eq!(listed, ours);
}

#[test]
fn fixed_seed_reports_are_byte_identical() {
    let args = ["all", "--samples", "20", "--trials", "100", "--seed", "5", "--omit-timing", "-q"];
    let a = k3cert(&args);
    let b = k3cert(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_valid(&json(&a));
}
