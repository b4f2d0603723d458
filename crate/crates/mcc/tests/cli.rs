//! End-to-end runs of the `mcc` binary: exit codes, output channels,
//! and the stability guarantees scripts depend on.

use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

/// Run the binary with color pinned off so assertions on stderr text
/// stay byte-exact; individual tests override MCC_COLOR as needed.
fn mcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcc"))
        .args(args)
        .env("MCC_COLOR", "0")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn selftest_reports_every_stage_ok() {
    let out = mcc(&["selftest"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(lines.len(), 9, "one line per stage:\n{text}");
    assert!(lines.iter().all(|l| l.starts_with("ok")), "{text}");
    assert!(text.contains("fixpoint"));
}

#[test]
fn a_model_alone_checks_quietly() {
    let out = mcc(&["check", &fixture("arith.asm")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).is_empty());
}

#[test]
fn lenient_checking_repairs_and_warns() {
    let out = mcc(&["check", &fixture("meta.asm"), &fixture("property_style.mcd")]);
    assert_eq!(out.status.code(), Some(0), "repairs are not errors");
    let err = stderr(&out);
    assert!(err.contains("dsl.missing-colon"), "{err}");
    assert!(err.contains("warning"), "{err}");
}

#[test]
fn strict_checking_rejects_the_same_lines() {
    let out = mcc(&[
        "check",
        &fixture("meta.asm"),
        &fixture("property_style.mcd"),
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dsl.syntax"), "{}", stderr(&out));
}

#[test]
fn conflicting_mappings_fail_the_check() {
    let path = std::env::temp_dir().join("mcc-cli-conflict.mcd");
    std::fs::write(&path, "Element: name?\n").unwrap();
    let out = mcc(&["check", &fixture("meta.asm"), path.to_str().unwrap()]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("constraints.conflict"), "{}", stderr(&out));
}

#[test]
fn unreadable_files_are_usage_failures() {
    let out = mcc(&["check", "no/such/model.asm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"), "{}", stderr(&out));
}

#[test]
fn json_diagnostics_are_machine_readable() {
    let out = mcc(&[
        "check",
        &fixture("meta.asm"),
        &fixture("property_style.mcd"),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&stderr(&out)).expect("valid json");
    let list = parsed.as_array().expect("an array of diagnostics");
    assert!(!list.is_empty());
    for d in list {
        assert!(d.get("code").is_some() && d.get("severity").is_some(), "{d}");
    }
}

#[test]
fn grammar_export_is_byte_stable() {
    let first = mcc(&["grammar", &fixture("arith.asm")]);
    let second = mcc(&["grammar", &fixture("arith.asm")]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("::="), "{}", stdout(&first));
}

#[test]
fn grammar_exports_json_too() {
    let out = mcc(&["grammar", &fixture("arith.asm"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert!(parsed.get("productions").is_some());
    assert_eq!(parsed["start"], "Expr");
}

#[test]
fn surprising_arguments_are_usage_errors() {
    assert_eq!(mcc(&[]).status.code(), Some(2));
    assert_eq!(
        mcc(&["grammar", &fixture("arith.asm"), "--format", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(mcc(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_prints_an_instance_graph() {
    let out = mcc(&["parse", &fixture("arith.asm"), &fixture("arith_input.txt")]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let graph: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(graph["language"], "arith");
    let nodes = graph["nodes"].as_array().unwrap();
    let root_id = graph["roots"][0].as_u64().unwrap();
    let root = nodes.iter().find(|n| n["id"].as_u64() == Some(root_id)).unwrap();
    // 1+2*3: addition at the top, multiplication underneath.
    assert_eq!(root["element"], "Add");
    assert!(nodes.iter().any(|n| n["element"] == "Mul"));
}

#[test]
fn the_toolchain_reads_its_own_mapping_files() {
    let out = mcc(&[
        "parse",
        &fixture("meta.asm"),
        &fixture("grammar_style.mcd"),
        &fixture("property_style.mcd"),
        "--lenient",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let graph: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(graph["language"], "mcd");
    let defs = graph["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|n| n["element"] == "ConstraintDefinition")
        .count();
    assert_eq!(defs, 17, "one definition per line of the property-style file");
}

#[test]
fn color_follows_the_environment() {
    let run = |color: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_mcc"))
            .args(["check", &fixture("meta.asm"), &fixture("property_style.mcd")])
            .env("MCC_COLOR", color)
            .output()
            .expect("binary runs");
        stderr(&out)
    };
    assert!(run("always").contains("\x1b["));
    assert!(!run("never").contains("\x1b["));
}
