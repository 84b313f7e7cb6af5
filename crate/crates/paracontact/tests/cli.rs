use std::process::{Command, Output};

use paracontact_core::dsl::FLAT3_SOURCE;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracontact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_example25_json() {
    let o = run(&[
        "verify",
        "--builtin",
        "example25",
        "--points",
        "100",
        "--seed",
        "42",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    // top-level keys appear in the documented order
    let keys: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("  \"")?.split('"').next())
        .collect();
    assert_eq!(
        keys,
        [
            "model",
            "seed",
            "points",
            "tolerances",
            "claims",
            "theorems",
            "einstein_fit",
            "alpha_beta_summary",
            "notes"
        ]
    );
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let claim = v["claims"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["claim_id"] == "eq-3.12")
        .unwrap();
    assert_eq!(claim["status"], "pass");
    assert_eq!(v["alpha_beta_summary"]["alpha"], 0.5);
}

#[test]
fn verify_flat3_text() {
    let o = run(&["verify", "--builtin", "flat3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verdict einstein"));
    assert!(!out.contains("refuted"));
    assert!(out.trim_end().ends_with("result: PASS"));
}

#[test]
fn broken_model_exits_2_naming_the_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.model");
    std::fs::write(
        &path,
        FLAT3_SOURCE.replace("epsilon = (+1, -1, +1)", "epsilon = (+1, +1, +1)"),
    )
    .unwrap();
    let o = run(&["verify", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("epsilon") && err.contains("signature must be (2,1)"),
        "{err}"
    );

    let o = run(&[
        "verify",
        "--model",
        dir.path().join("missing.model").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.model");
    std::fs::write(&path, FLAT3_SOURCE).unwrap();
    let from_file = run(&[
        "verify",
        "--model",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--points",
        "5",
    ]);
    let builtin = run(&[
        "verify",
        "--builtin",
        "flat3",
        "--format",
        "json",
        "--points",
        "5",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, builtin.stdout);
}

#[test]
fn tight_tolerance_fails_with_exit_1() {
    let o = run(&[
        "verify",
        "--builtin",
        "example25",
        "--points",
        "10",
        "--tol-curvature",
        "1e-18",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn tensor_queries() {
    let o = run(&[
        "tensor",
        "alphabeta",
        "--builtin",
        "example25",
        "--at",
        "0,0,0",
    ]);
    assert_eq!(stdout(&o), "alpha = 0.5, beta = 1.0\n");
    let o = run(&["tensor", "scal", "--builtin", "flat3", "--at", "0,0,0"]);
    assert_eq!(stdout(&o), "scal = 0.0\n");
    let o = run(&["tensor", "B", "--builtin", "flat3", "--at", "0,0,0"]);
    assert!(stdout(&o)
        .lines()
        .any(|l| l == "B[1,2,2,1] = 0.666666666667"));
    let o = run(&[
        "tensor",
        "g",
        "--builtin",
        "example25",
        "--at",
        "0.5,-0.25,0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 9);
    let o = run(&["tensor", "torsion", "--builtin", "flat3", "--at", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alphabeta"));
}

#[test]
fn model_source_is_required_and_exclusive() {
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--builtin", "flat3", "--model", "x.model"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--builtin", "flat3", "--points", "0"])
            .status
            .code(),
        Some(2)
    );
}
