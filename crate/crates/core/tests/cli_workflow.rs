mod common;

use std::fs;

use graph_agent::cli::{cmd_evaluate, cmd_explain, cmd_ingest, cmd_memorize, cmd_report, CliError, Runtime};
use graph_agent::graph::load_graph_files;
use graph_agent::synthetic::biomedical_fixture;

use common::{config_text, traces_path, write_config, write_fixture, LINK_TASK, NODE_TASK};

const MAJORITY: &str = r#"kind = "mock-majority""#;

fn sha_line(out: &str) -> String {
    out.lines().find(|l| l.starts_with("store sha256")).unwrap().to_string()
}

#[test]
fn memorize_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let cfg = write_config(dir.path(), &config_text(LINK_TASK, "", MAJORITY, ""));
    let first = cmd_memorize(&cfg, &Runtime::default()).unwrap();
    let second = cmd_memorize(&cfg, &Runtime::default()).unwrap();
    assert_eq!(sha_line(&first), sha_line(&second));
    assert!(cfg.run.output_dir.join("manifest.json").exists());
}

#[test]
fn evaluate_without_store_says_what_to_run() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let cfg = write_config(dir.path(), &config_text(LINK_TASK, "", MAJORITY, ""));
    let err = cmd_evaluate(&cfg, &Runtime::default()).unwrap_err();
    assert!(matches!(err, CliError::Data(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("memorize"), "{err}");
}

#[test]
fn store_from_another_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let mut cfg = write_config(dir.path(), &config_text(NODE_TASK, "", MAJORITY, ""));
    cmd_memorize(&cfg, &Runtime::default()).unwrap();
    cfg.run.seed += 1;
    let err = cmd_evaluate(&cfg, &Runtime::default()).unwrap_err();
    assert!(err.to_string().contains("different split"), "{err}");
}

#[test]
fn report_check_and_explain() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let cfg = write_config(dir.path(), &config_text(NODE_TASK, "", MAJORITY, ""));
    cmd_memorize(&cfg, &Runtime::default()).unwrap();
    let (table, report) = cmd_evaluate(&cfg, &Runtime::default()).unwrap();
    assert!(table.contains("accuracy"), "{table}");

    let rpath = cfg.run.output_dir.join("report.json");
    let checked = cmd_report(&rpath, false, true).unwrap();
    assert!(checked.contains("metrics match the trace file"));

    let traces = graph_agent::evaluator::read_traces(&traces_path(&cfg)).unwrap();
    assert_eq!(report.split.test, traces.len());
    let target = traces[0].target.to_string();
    let text = cmd_explain(&traces_path(&cfg), &target, false).unwrap();
    for heading in ["== Target ==", "== Examples ==", "== Induced reasons ==", "== Answer =="] {
        assert!(text.contains(heading), "missing {heading}");
    }
    let json = cmd_explain(&traces_path(&cfg), &target, true).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&json).is_ok());

    let err = cmd_explain(&traces_path(&cfg), "no-such-node", false).unwrap_err();
    assert!(err.to_string().contains("no trace for sample"));
}

#[test]
fn tampered_report_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let cfg = write_config(dir.path(), &config_text(LINK_TASK, "", MAJORITY, ""));
    cmd_memorize(&cfg, &Runtime::default()).unwrap();
    cmd_evaluate(&cfg, &Runtime::default()).unwrap();
    let rpath = cfg.run.output_dir.join("report.json");
    let mut report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rpath).unwrap()).unwrap();
    report["metrics"]["overall"]["tp"] = serde_json::json!(9999);
    fs::write(&rpath, report.to_string()).unwrap();
    assert!(cmd_report(&rpath, false, true).is_err());
}

#[test]
fn ingest_summary_and_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let g = load_graph_files(&dir.path().join("nodes.jsonl"), &dir.path().join("edges.jsonl")).unwrap();
    let summary = cmd_ingest(&g).unwrap();
    assert!(summary.starts_with("60 nodes\n150 edges\n"), "{summary}");
    assert!(summary.contains("targets"));

    let bad = dir.path().join("bad.jsonl");
    let mut text = fs::read_to_string(dir.path().join("nodes.jsonl")).unwrap();
    text.push_str("{not json}\n");
    fs::write(&bad, text).unwrap();
    let err = load_graph_files(&bad, &dir.path().join("edges.jsonl")).unwrap_err();
    assert!(err.to_string().contains(":61:"), "{err}");

    let empty_n = dir.path().join("empty_n.jsonl");
    let empty_e = dir.path().join("empty_e.jsonl");
    fs::write(&empty_n, "").unwrap();
    fs::write(&empty_e, "").unwrap();
    let g = load_graph_files(&empty_n, &empty_e).unwrap();
    assert!(cmd_ingest(&g).unwrap().starts_with("0 nodes\n0 edges\n"));
}

#[test]
fn scripted_always_true_predicts_every_link() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &biomedical_fixture(11));
    let backend = "kind = \"mock-scripted\"\nscripted = [[\"*\", \"TRUE\"]]";
    let cfg = write_config(dir.path(), &config_text(LINK_TASK, "", backend, ""));
    cmd_memorize(&cfg, &Runtime::default()).unwrap();
    let (_, report) = cmd_evaluate(&cfg, &Runtime::default()).unwrap();
    let graph_agent::evaluator::ReportMetrics::LinkPrediction { overall, .. } = report.metrics else {
        panic!("expected link metrics");
    };
    assert_eq!(overall.recall, 1.0);
    assert_eq!(overall.tn + overall.fn_, 0);
    assert_eq!(overall.accuracy, overall.tp as f64 / overall.total as f64);
    assert_eq!(overall.precision, overall.accuracy);
}
