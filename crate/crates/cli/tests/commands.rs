use std::path::PathBuf;
use std::process::{Command, Output};

use incver_cli::{diff_verify_sources, parse_source, verify_source, GrammarKind, Sidecar};
use incver_cli::config::{load_automaton, load_profile};
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn incver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incver")).args(args).output().unwrap()
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn safety() -> Sidecar {
    Sidecar::Safety { automaton: load_automaton(fixture("alternation.json").as_ref()).unwrap(), unroll: 3 }
}

fn reliability() -> Sidecar {
    Sidecar::Reliability(load_profile(fixture("profile.json").as_ref()).unwrap())
}

#[test]
fn exit_codes() {
    let profile = fixture("profile.json");
    let automaton = fixture("alternation.json");
    let ok = incver(&["verify", &fixture("v1.mini"), "--schema", "reliability", "--profile", &profile]);
    assert_eq!(ok.status.code(), Some(0));
    let safe = incver(&["verify", &fixture("v1.mini"), "--schema", "safety", "--automaton", &automaton]);
    assert_eq!(safe.status.code(), Some(0));
    let violation = incver(&["verify", &fixture("v2.mini"), "--schema", "safety", "--automaton", &automaton]);
    assert_eq!(violation.status.code(), Some(1));
    let missing = incver(&["verify", "no-such-file.mini", "--schema", "safety", "--automaton", &automaton]);
    assert_eq!(missing.status.code(), Some(2));
    let no_sidecar = incver(&["verify", &fixture("v1.mini"), "--schema", "safety"]);
    assert_eq!(no_sidecar.status.code(), Some(2));
    let bad_expr = incver(&["eval-expr", "5*+2"]);
    assert_eq!(bad_expr.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_expr.stderr).starts_with("error:"));
}

#[test]
fn eval_expr_prints_the_value() {
    let out = incver(&["eval-expr", "5*4+2+6*7*8"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "358");
}

#[test]
fn diff_verify_json_golden() {
    let out = incver(&[
        "diff-verify",
        &fixture("v1.mini"),
        &fixture("v2.mini"),
        "--schema",
        "reliability",
        "--profile",
        &fixture("profile.json"),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["wall_time_ms"].as_f64().unwrap() >= 0.0);
    report["wall_time_ms"] = Value::Null;
    report["programs"] = Value::Null;
    let expected: Value = serde_json::from_str(
        r#"{
            "command": "diff-verify",
            "schema": "reliability",
            "programs": null,
            "result": {
                "verdict": null, "value": "0.940900000000", "exact": "9409/10000",
                "expression": null, "witness": null, "tuples_processed": null
            },
            "previous": {
                "verdict": null, "value": "0.960300000000", "exact": "9603/10000",
                "expression": null, "witness": null, "tuples_processed": null
            },
            "reuse": { "tokens_reparsed": 3, "nodes_rebuilt": 5, "nodes_reused": 35, "subcontext": [5, 8] },
            "recompute": { "nodes": [6, 5, 1, 0], "attributes_recomputed": 8, "attributes_reused": 19 },
            "warnings": [],
            "wall_time_ms": null
        }"#,
    )
    .unwrap();
    assert_eq!(report, expected);
}

#[test]
fn parse_dump_numbers_the_tree() {
    let dump = parse_source("v1.mini", &read("v1.mini"), GrammarKind::Mini).unwrap();
    assert_eq!(dump.root_rule, "S ::= begin stmtlist end");
    assert_eq!(dump.nodes.len(), 22);
    let numbers: Vec<usize> = dump.nodes.iter().filter_map(|n| n.number).collect();
    assert_eq!(numbers, (0..22).collect::<Vec<_>>());

    let out = incver(&["parse", &fixture("v1.mini"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["nodes"].as_array().unwrap().len(), 22);
}

#[test]
fn empty_program_is_a_syntax_error() {
    let err = parse_source("empty.mini", "", GrammarKind::Mini).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("token 0"), "{err}");
}

#[test]
fn identical_versions_recompute_nothing() {
    let v1 = read("v1.mini");
    for sidecar in [reliability(), safety()] {
        let report = diff_verify_sources(("a", &v1), ("b", &v1), &sidecar).unwrap();
        let recompute = report.recompute.unwrap();
        assert_eq!(recompute.attributes_recomputed, 0);
        assert!(recompute.nodes.is_empty());
        assert_eq!(report.result.verdict, report.previous.as_ref().unwrap().verdict);
        assert_eq!(report.result.exact, report.previous.unwrap().exact);
    }
}

#[test]
fn incremental_result_equals_scratch() {
    let (v1, v2) = (read("v1.mini"), read("v2.mini"));
    for sidecar in [reliability(), safety()] {
        let incremental = diff_verify_sources(("v1", &v1), ("v2", &v2), &sidecar).unwrap();
        let scratch = verify_source("v2", &v2, &sidecar).unwrap();
        assert_eq!(incremental.result.verdict, scratch.result.verdict);
        assert_eq!(incremental.result.exact, scratch.result.exact);
        assert_eq!(incremental.result.witness, scratch.result.witness);
    }
}

#[test]
fn reversed_edit_restores_the_first_result() {
    let (v1, v2) = (read("v1.mini"), read("v2.mini"));
    let back = diff_verify_sources(("v2", &v2), ("v1", &v1), &reliability()).unwrap();
    assert_eq!(back.result.exact.as_deref(), Some("9603/10000"));
}

#[test]
fn text_report_mentions_the_witness() {
    let out = incver(&["verify", &fixture("v2.mini"), "--schema", "safety", "--automaton", &fixture("alternation.json")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("result: unsafe"));
    assert!(text.contains("witness: [Assign(x,false), Check(x==true,false)]"));
}
