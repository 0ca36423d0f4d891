use std::path::PathBuf;
use std::process::Command;

use jsonschema::JSONSchema;
use serde_json::Value;

fn schema(name: &str) -> JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let value: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::compile(&value).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_homology-census"))
        .args(args)
        .env_remove("HOMOLOGY_CENSUS_WORKERS")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_valid(name: &str, args: &[&str]) {
    let compiled = schema(name);
    let doc = run(args);
    let msgs: Vec<String> = match compiled.validate(&doc) {
        Ok(()) => return,
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    panic!("{args:?} violates {name} schema:\n{}", msgs.join("\n"));
}

#[test]
fn count_output() {
    assert_valid("count", &["count", "--q", "2", "--n", "4"]);
    assert_valid(
        "count",
        &["count", "--q", "9", "--n", "7", "--precision", "3"],
    );
}

#[test]
fn limit_output() {
    assert_valid("limit", &["limit", "--q", "2", "--eps", "1e-9"]);
    assert_valid(
        "limit",
        &["limit", "--q", "5", "--parity", "odd", "--rmax", "3"],
    );
}

#[test]
fn sample_output() {
    assert_valid(
        "sample",
        &[
            "sample", "--q", "2", "--n", "5", "--num", "2000", "--seed", "3",
        ],
    );
    assert_valid(
        "sample",
        &[
            "sample",
            "--q",
            "3",
            "--n",
            "4",
            "--num",
            "1",
            "--workers",
            "2",
        ],
    );
}

#[test]
fn verify_output() {
    assert_valid("verify", &["verify", "--q", "2", "--max-n", "3"]);
    assert_valid(
        "verify",
        &[
            "verify",
            "--q",
            "3",
            "--max-n",
            "2",
            "--timing",
            "--check-normal-form",
        ],
    );
}

#[test]
fn table_output() {
    assert_valid(
        "table",
        &["table", "--q", "2,3", "--n", "2,4,6", "--format", "json"],
    );
}

#[test]
fn schemas_reject_malformed_reports() {
    let compiled = schema("count");
    let mut doc = run(&["count", "--q", "2", "--n", "2"]);
    doc["total"] = Value::from(4);
    assert!(!compiled.is_valid(&doc));
}
