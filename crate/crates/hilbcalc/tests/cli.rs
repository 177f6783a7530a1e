//! End-to-end tests of the `hilbcalc` binary: exit codes, output formats,
//! determinism, and cache transparency.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_hilbcalc");

/// Runs the binary with the given arguments and no inherited cache.
fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("HILBCALC_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write temp file");
    path.to_str().expect("utf-8 path").to_owned()
}

/// The builtin projective-plane model with one multiplication entry rescaled,
/// which silently breaks the unit law and associativity but not the schema.
const BROKEN_UNIT_MODEL: &str = r#"{
  "name": "BadUnit",
  "basis": [
    { "name": "1", "degree": 0 },
    { "name": "h", "degree": 2 },
    { "name": "p", "degree": 4 }
  ],
  "mult": [
    { "i": 0, "j": 0, "k": 0, "c": "1" },
    { "i": 0, "j": 1, "k": 1, "c": "2" },
    { "i": 0, "j": 2, "k": 2, "c": "1" },
    { "i": 1, "j": 1, "k": 2, "c": "1" }
  ],
  "integral": { "p": "1" },
  "canonical_class": { "h": "-3" },
  "euler_class": { "p": "3" },
  "point_class": "p"
}"#;

/// Same model with a duplicated basis name: a schema-level error.
const DUPLICATE_NAME_MODEL: &str = r#"{
  "name": "DupName",
  "basis": [
    { "name": "1", "degree": 0 },
    { "name": "1", "degree": 2 },
    { "name": "p", "degree": 4 }
  ],
  "mult": [
    { "i": 0, "j": 0, "k": 0, "c": "1" },
    { "i": 0, "j": 1, "k": 1, "c": "1" },
    { "i": 0, "j": 2, "k": 2, "c": "1" },
    { "i": 1, "j": 1, "k": 2, "c": "1" }
  ],
  "integral": { "p": "1" },
  "canonical_class": {},
  "euler_class": { "p": "3" },
  "point_class": "p"
}"#;

#[test]
fn surface_check_accepts_every_builtin_model() {
    for name in ["P2", "P1xP1", "K3like", "Abelianlike"] {
        let model = format!("builtin:{name}");
        let out = run(&["--model", &model, "--no-cache", "surface-check"]);
        assert_eq!(exit_code(&out), 0, "surface-check {name}: {}", stderr_str(&out));
        let doc: Value = serde_json::from_str(&stdout_str(&out)).expect("json report");
        assert_eq!(doc["model"], json!(name));
        assert_eq!(doc["passed"], json!(true));
        assert_eq!(doc["pushforward"]["passed"], json!(true));
    }
}

#[test]
fn surface_check_reports_axiom_violations_with_exit_code_1() {
    let dir = TempDir::new().unwrap();
    let path = write_file(dir.path(), "bad_unit.json", BROKEN_UNIT_MODEL);
    let out = run(&["--model", &path, "--no-cache", "surface-check"]);
    assert_eq!(exit_code(&out), 1);
    let text = format!("{}{}", stdout_str(&out), stderr_str(&out));
    assert!(text.contains("unit law"), "names the broken axiom: {text}");
    assert!(text.contains("(1, 1, h)"), "names an offending triple: {text}");
}

#[test]
fn surface_check_rejects_schema_errors_with_exit_code_2() {
    let dir = TempDir::new().unwrap();
    let path = write_file(dir.path(), "dup_name.json", DUPLICATE_NAME_MODEL);
    let out = run(&["--model", &path, "--no-cache", "surface-check"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("schema"), "stderr: {}", stderr_str(&out));
}

#[test]
fn commands_without_a_model_are_usage_errors() {
    let out = run(&["--no-cache", "intersect", "--n", "1", "--gen", "0:p"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("--model"), "stderr: {}", stderr_str(&out));
}

#[test]
fn cup_with_the_unit_class_returns_the_other_factor() {
    let dir = TempDir::new().unwrap();
    // 1_{X^[2]} = (1/2) a_{-1}(1)^2 |0>.
    let unit = write_file(
        dir.path(),
        "unit.json",
        r#"[{"factors":[{"r":1,"c":"1"},{"r":1,"c":"1"}],"coeff":"1/2"}]"#,
    );
    let other = write_file(
        dir.path(),
        "other.json",
        r#"[{"factors":[{"r":1,"c":"h"},{"r":1,"c":"1"}],"coeff":"1"}]"#,
    );
    let out = run(&["--model", "builtin:P2", "--no-cache", "cup", "--n", "2", &unit, &other]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let got: Value = serde_json::from_str(&stdout_str(&out)).expect("json vector");
    let want = json!([{"coeff": "1", "factors": [{"c": "1", "r": 1}, {"c": "h", "r": 1}]}]);
    assert_eq!(got, want);
}

#[test]
fn cup_rejects_factors_of_the_wrong_weight_with_exit_code_2() {
    let dir = TempDir::new().unwrap();
    let a = write_file(
        dir.path(),
        "a.json",
        r#"[{"factors":[{"r":2,"c":"1"}],"coeff":"1"}]"#,
    );
    let out = run(&["--model", "builtin:P2", "--no-cache", "cup", "--n", "3", &a, &a]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("X^[3]"), "stderr: {}", stderr_str(&out));
}

#[test]
fn intersect_integrates_a_point_on_the_surface_itself() {
    let out = run(&["--model", "builtin:P2", "--no-cache", "intersect", "--n", "1", "--gen", "0:p"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    assert_eq!(stdout_str(&out).trim(), "1");
}

#[test]
fn intersect_prints_zero_when_total_degree_misses_the_fundamental_class() {
    let out = run(&["--model", "builtin:P2", "--no-cache", "intersect", "--n", "2", "--gen", "0:h"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    assert_eq!(stdout_str(&out).trim(), "0");
}

#[test]
fn expand_chern_prints_the_exact_commutator_expansion() {
    let out = run(&[
        "--model", "builtin:P2", "--no-cache",
        "expand-chern", "--k", "0", "--alpha", "h", "--r", "2",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let got: Value = serde_json::from_str(&stdout_str(&out)).expect("json document");
    // [G_0(h), a_{-2}(1)] = 2 a_{-2}(h): one term, exact coefficient.
    let want = json!({
        "budget": 6,
        "terms": [{"coeff": "2", "factors": [{"c": "h"}], "indices": [-2]}],
    });
    assert_eq!(got, want);
}

#[test]
fn verify_runs_a_single_suite_and_reports_success() {
    let out = run(&[
        "--model", "builtin:P2", "--no-cache",
        "verify", "--suite", "worked-constants",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc: Value = serde_json::from_str(&stdout_str(&out)).expect("json report");
    assert_eq!(doc["passed"], json!(true));
    assert_eq!(doc["suites"][0]["suite"], json!("worked-constants"));
}

#[test]
fn verify_rejects_unknown_suites_with_exit_code_2() {
    let out = run(&["--no-cache", "verify", "--suite", "nonexistent"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr_str(&out);
    assert!(err.contains("unknown suite"), "stderr: {err}");
    assert!(err.contains("heisenberg"), "lists the available suites: {err}");
}

#[test]
fn structure_constants_stream_is_valid_jsonl_with_sorted_keys() {
    let out = run(&[
        "--model", "builtin:P2", "--no-cache",
        "structure-constants", "--max-weight", "3",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let rows: Vec<Value> = text
        .lines()
        .map(|line| serde_json::from_str(line).expect("each line is a JSON row"))
        .collect();
    assert!(!rows.is_empty());
    for row in &rows {
        assert!(row["rho"].is_array() && row["sigma"].is_array() && row["terms"].is_array());
        for term in row["terms"].as_array().unwrap() {
            let d = term["d"].as_str().expect("rational as string");
            assert!(!d.is_empty() && d != "0", "no zero terms are emitted: {row}");
        }
    }
    // First row is the smallest ordered pair: {1:(1)} x {1:(1)}.
    let first = &rows[0];
    assert_eq!(first["rho"], json!([{"c": "1", "parts": [1]}]));
    assert_eq!(first["sigma"], json!([{"c": "1", "parts": [1]}]));
}

#[test]
fn structure_constants_output_is_deterministic_and_cache_transparent() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let base = ["--model", "builtin:K3like", "structure-constants", "--max-weight", "4"];

    let mut outputs = Vec::new();
    // Uncached, single-threaded.
    outputs.push(run(&[&["--no-cache", "--jobs", "1"], &base[..]].concat()));
    // Uncached, parallel.
    outputs.push(run(&[&["--no-cache", "--jobs", "4"], &base[..]].concat()));
    // Cold cache, then warm cache.
    outputs.push(run(&[&["--cache-dir", cache], &base[..]].concat()));
    outputs.push(run(&[&["--cache-dir", cache], &base[..]].concat()));

    for out in &outputs {
        assert_eq!(exit_code(out), 0, "stderr: {}", stderr_str(out));
    }
    let reference = &outputs[0].stdout;
    assert!(!reference.is_empty());
    for out in &outputs[1..] {
        assert_eq!(&out.stdout, reference, "all runs must be byte-identical");
    }
}

#[test]
fn out_flag_writes_exactly_the_stdout_bytes() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("result.json");
    let args = [
        "--model", "builtin:P2", "--no-cache",
        "expand-chern", "--k", "1", "--alpha", "h", "--r", "1",
    ];
    let stdout_run = run(&args);
    assert_eq!(exit_code(&stdout_run), 0);

    let mut with_out: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap();
    with_out.splice(3..3, ["--out", path_str]);
    let file_run = run(&with_out);
    assert_eq!(exit_code(&file_run), 0, "stderr: {}", stderr_str(&file_run));
    assert!(file_run.stdout.is_empty(), "output went to the file, not stdout");

    let file_bytes = std::fs::read(&path).expect("output file exists");
    assert_eq!(file_bytes, stdout_run.stdout);
}

#[test]
fn pretty_format_renders_verify_as_a_table() {
    let out = run(&[
        "--model", "builtin:P2", "--no-cache", "--format", "pretty",
        "verify", "--suite", "worked-constants",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    assert!(text.contains("worked-constants"), "stdout: {text}");
    assert!(text.contains("PASS"), "stdout: {text}");
}
