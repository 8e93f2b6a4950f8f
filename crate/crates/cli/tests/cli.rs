use std::process::{Command, Output};

use serde_json::Value;

const SCHEMA: &str = include_str!("../schema/exotic-bv.v1.schema.json");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exotic-bv"))
        .args(args)
        .env_remove("EXOTIC_BV_MZV_TABLE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    let doc: Value = serde_json::from_str(&stdout(&o)).expect("valid JSON");
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}");
    (doc, o.status.code().unwrap())
}

#[test]
fn enumerate_top_primes() {
    let (doc, code) = json(&["enumerate", "--n", "6", "--class", "prime", "--top"]);
    assert_eq!(code, 0);
    assert_eq!(doc["schema_version"], 1);
    let ds = doc["result"]["diagrams"].as_array().unwrap();
    assert_eq!(ds.len(), 4);
    assert!(ds.iter().any(|d| d["bracketing"] == "[[[1,3],4],[2,5]]"));
    assert_eq!(
        json(&["enumerate", "--n", "5", "--class", "prime", "--top"]).0["result"]["diagrams"].as_array().unwrap().len(),
        1
    );
    assert!(json(&["enumerate", "--n", "4", "--class", "prime", "--top"]).0["result"]["diagrams"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn low_arity_operations() {
    let o = run(&["nu", "--n", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "m(1,2)");
    let o = run(&["nu", "--n", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "");
}

#[test]
fn pentagon_and_hexagon() {
    let o = run(&["--ascii", "exotic", "nu", "--n", "5", "--format", "pretty"]);
    let text = stdout(&o);
    assert!(text.starts_with("zeta(2)*("), "{text}");
    assert!(text.contains("D(1)D(2)34"));
    let (doc, _) = json(&["nu", "--n", "6"]);
    let terms = doc["result"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 4);
    assert!(terms.iter().all(|t| t["coefficient"].as_str().unwrap().trim_start_matches('-') == "zeta(3)"));
}

#[test]
fn verification_suites() {
    for suite in [
        vec!["verify", "appendix", "--max-n", "9"],
        vec!["verify", "bases", "--max-n", "6"],
        vec!["verify", "nu5-match", "--d", "2", "--trials", "10"],
        vec!["verify", "bv-axioms", "--trials", "10"],
        vec!["verify", "derivation", "--n", "3,5", "--trials", "5"],
        vec!["verify", "ainfty", "--max-n", "6", "--trials", "5"],
        vec!["darboux", "check", "--suite", "leibniz", "--trials", "5"],
    ] {
        let (doc, code) = json(&suite);
        assert_eq!(code, 0, "{suite:?}");
        assert_eq!(doc["passed"], true, "{suite:?}");
    }
}

#[test]
fn failing_check_exits_with_one() {
    let (doc, code) = json(&["verify", "ainfty", "--max-n", "6", "--trials", "5", "--perturb", "0.01"]);
    assert_eq!(code, 1);
    assert_eq!(doc["passed"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "2", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["nu", "--n", "12"]).status.code(), Some(2));
    assert_eq!(run(&["periods", "integrate", "--n", "6", "--prime-index", "9"]).status.code(), Some(2));
}

#[test]
fn period_integration() {
    let (doc, code) = json(&["periods", "integrate", "--n", "5", "--tol", "1e-10"]);
    assert_eq!(code, 0);
    assert!((doc["result"]["value"].as_f64().unwrap() - 1.6449340668482264).abs() < 1e-8);
    assert_eq!(doc["result"]["fitted"], "zeta(2)");
}

#[test]
fn table_from_environment() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/mzv_table.json");
    let o = Command::new(env!("CARGO_BIN_EXE_exotic-bv"))
        .args(["nu", "--n", "5"])
        .env("EXOTIC_BV_MZV_TABLE", path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_exotic-bv"))
        .args(["nu", "--n", "5"])
        .env("EXOTIC_BV_MZV_TABLE", "/nonexistent/table.json")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
