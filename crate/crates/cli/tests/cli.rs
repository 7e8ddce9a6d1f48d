use std::io::Write;
use std::process::{Command, Output, Stdio};

fn dispenser(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dispenser"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const XOR1: &str = "p cnf 2 2\n1 2 0\n-1 -2 0\n";
const UNIT: &str = "c only v1 forced\np cnf 2 1\n1 0\n";

#[test]
fn default_is_bdd_direct_dispensable() {
    let o = dispenser(&["-"], XOR1);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "status=sat dispensable={}\n");
    let o = dispenser(&["-"], UNIT);
    assert_eq!(stdout(&o), "status=sat dispensable={2}\n");
}

#[test]
fn unsat_is_reported_in_band() {
    let o = dispenser(&["--engine", "maxsat-enum", "-"], "p cnf 1 2\n1 0\n-1 0\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "status=unsat dispensable={1}\n");
}

#[test]
fn json_report_schema() {
    for engine in ["maxsat-enum", "bdd-enum", "bdd-direct", "oracle"] {
        let o = dispenser(&["--engine", engine, "--format", "json", "-"], UNIT);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["status"], "sat");
        assert_eq!(v["engine"], engine);
        assert_eq!(v["dispensable"], serde_json::json!([2]));
        assert_eq!(v["truncated"], false);
        assert!(v["stats"]["elapsed_ms"].is_number());
        assert!(v["stats"].get("bdd_size").is_some());
        assert!(v["stats"].get("solver_decisions").is_some());
        assert!(v.get("num_minimal_models").is_some());
    }
}

#[test]
fn enumerate_lists_bit_strings() {
    let o = dispenser(
        &["--engine", "bdd-enum", "--mode", "enumerate", "-"],
        "p cnf 2 1\n1 2 0\n",
    );
    assert_eq!(stdout(&o), "01\n10\n");
    let o = dispenser(
        &[
            "--engine",
            "bdd-direct",
            "--mode",
            "enumerate",
            "--format",
            "json",
            "-",
        ],
        XOR1,
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["models"], serde_json::json!(["01", "10"]));
    assert_eq!(v["num_minimal_models"], 2);
}

#[test]
fn model_cap_truncates() {
    let xor3 = "p cnf 6 6\n1 2 0\n-1 -2 0\n3 4 0\n-3 -4 0\n5 6 0\n-5 -6 0\n";
    let o = dispenser(
        &[
            "--engine",
            "maxsat-enum",
            "--mode",
            "enumerate",
            "--max-models",
            "3",
            "--format",
            "json",
            "-",
        ],
        xor3,
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["truncated"], true);
    assert_eq!(v["models"].as_array().unwrap().len(), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("over-approximation"));
}

#[test]
fn check_mode_table() {
    let o = dispenser(&["--mode", "check", "-"], UNIT);
    assert!(o.status.success());
    let text = stdout(&o);
    for engine in ["maxsat-enum", "bdd-enum", "bdd-direct", "oracle"] {
        assert!(
            text.lines()
                .any(|l| l.starts_with(engine) && l.contains("{2}")),
            "{text}"
        );
    }
    assert!(text.ends_with("agreement=yes\n"));
}

#[test]
fn export_wcnf() {
    let o = dispenser(&["--mode", "export-wcnf", "-"], "p cnf 2 1\n1 2 0\n");
    assert_eq!(stdout(&o), "p wcnf 2 3 3\n3 1 2 0\n1 -1 0\n1 -2 0\n");
}

#[test]
fn variable_order_flag() {
    let o = dispenser(
        &[
            "--engine",
            "bdd-enum",
            "--mode",
            "enumerate",
            "--order",
            "2,1",
            "-",
        ],
        "p cnf 2 1\n1 2 0\n",
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "10\n01\n");
    let o = dispenser(&["--order", "1,1", "-"], XOR1);
    assert_eq!(o.status.code(), Some(2));
    let o = dispenser(&["--order", "1,2,3", "-"], XOR1);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_and_resource_exit_codes() {
    assert_eq!(dispenser(&["-"], "p cnf 2 1\n3 0\n").status.code(), Some(2));
    assert_eq!(
        dispenser(&["--engine", "sat4j", "-"], XOR1).status.code(),
        Some(2)
    );
    assert_eq!(
        dispenser(&["/nonexistent/file.cnf"], "").status.code(),
        Some(2)
    );
    let big = "p cnf 25 1\n1 25 0\n";
    assert_eq!(
        dispenser(&["--engine", "oracle", "-"], big).status.code(),
        Some(3)
    );
    // the other engines have no variable guard
    let o = dispenser(&["--engine", "maxsat-enum", "-"], big);
    assert!(o.status.success());
}

#[test]
fn stats_mode() {
    let o = dispenser(&["--mode", "stats", "--engine", "bdd-enum", "-"], XOR1);
    let text = stdout(&o);
    assert!(
        text.starts_with("engine=bdd-enum status=sat vars=2 clauses=2"),
        "{text}"
    );
    assert!(text.contains("bdd_size=5"));
}
