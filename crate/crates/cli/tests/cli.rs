//! End-to-end checks of the command-line binary: output shapes and the
//! documented exit codes (0 success, 2 unsatisfiable, 3 parse, 4 schema,
//! 5 validation, 64 usage).

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pta-mpc"))
        .args(args)
        .env_remove("PTA_MPC_FIXTURE_PATH")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn validate_reports_model_counts() {
    let output = run(&["validate", fixture("paintshop.json").to_str().unwrap()]);
    assert_eq!(code(&output), 0);
    assert_eq!(stdout(&output), "valid: 26 states, 34 edges, 7 redundant chains\n");
}

#[test]
fn missing_file_is_a_parse_failure() {
    let output = run(&["validate", "/nonexistent/model.json"]);
    assert_eq!(code(&output), 3);
}

#[test]
fn malformed_json_is_a_parse_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let output = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&output), 3);
}

#[test]
fn unknown_document_field_is_a_schema_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.json");
    fs::write(
        &path,
        r#"{
            "states": [{ "id": "a", "cost": 1, "risk_factor": 1, "location": "x", "speed": 9 }],
            "edges": [], "initial": "a", "desired_sequence": ["a"], "clocks": []
        }"#,
    )
    .unwrap();
    let output = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&output), 4);
}

#[test]
fn invalid_model_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("invalid.json");
    fs::write(
        &path,
        r#"{
            "states": [{ "id": "a", "cost": 1, "risk_factor": 1, "location": "x" }],
            "edges": [], "initial": "a", "desired_sequence": ["zz"], "clocks": []
        }"#,
    )
    .unwrap();
    let output = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&output), 5);
}

#[test]
fn plan_prints_the_selected_route_and_exact_value() {
    let output = run(&[
        "plan",
        fixture("paintshop.json").to_str().unwrap(),
        "--controller",
        "pcm",
    ]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("q1 -> q2 -> q3 -> q4 -> q5 -> q6 -> q7 -> q8"), "{text}");
    assert!(text.contains("208/21"), "{text}");
}

#[test]
fn plan_without_a_legal_route_exits_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocked.json");
    fs::write(
        &path,
        r#"{
            "states": [
                { "id": "a", "cost": 1, "risk_factor": 1, "location": "x" },
                { "id": "b", "cost": 1, "risk_factor": 1, "location": "x", "failed": true },
                { "id": "c", "cost": 1, "risk_factor": 1, "location": "x" }
            ],
            "edges": [
                { "src": "a", "dst": "b", "cost": 1, "kind": "original" },
                { "src": "b", "dst": "c", "cost": 1, "kind": "original" }
            ],
            "initial": "a", "desired_sequence": ["c"], "clocks": []
        }"#,
    )
    .unwrap();
    let output = run(&["plan", path.to_str().unwrap(), "--controller", "plain"]);
    assert_eq!(code(&output), 2);
    assert!(stdout(&output).contains("UNSAT"), "{}", stdout(&output));
}

#[test]
fn analyze_json_reports_exact_kappa() {
    let output = run(&[
        "analyze",
        fixture("paintshop.json").to_str().unwrap(),
        "--path",
        "q1,q14,q15,q16,q17,q18,q19,q8",
        "--json",
    ]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("\"kappa\":\"5/14\""), "{text}");
    assert!(text.contains("\"kappa_decimal\":\"0.357143\""), "{text}");
}

#[test]
fn simulate_reports_the_winner_in_text_form() {
    let output = run(&["simulate", fixture("scenario2.json").to_str().unwrap()]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("winner: cb"), "{text}");
    assert!(text.contains("cb: FINISHED, V = 16"), "{text}");
}

#[test]
fn compare_csv_starts_with_the_fixed_header() {
    let output = run(&[
        "compare",
        fixture("scenario1.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert_eq!(
        text.lines().next().unwrap(),
        "tick,controller,current,action,planned_V,fired_failures"
    );
}

#[test]
fn usage_errors_exit_64() {
    let bogus_flag = run(&[
        "plan",
        fixture("paintshop.json").to_str().unwrap(),
        "--controller",
        "bogus",
    ]);
    assert_eq!(code(&bogus_flag), 64);
    let bogus_command = run(&["frobnicate"]);
    assert_eq!(code(&bogus_command), 64);
}

#[test]
fn help_exits_cleanly() {
    let output = run(&["--help"]);
    assert_eq!(code(&output), 0);
    assert!(stdout(&output).contains("plan"), "subcommands listed");
}
