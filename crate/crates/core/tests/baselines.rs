mod common;

use graph_agent::evaluator::{build_memory, evaluate, prepare_task, EvalSettings, TaskDefinition};
use graph_agent::graph::degree_stats;
use graph_agent::llm::ScriptedMock;
use graph_agent::memory::HashingEmbedder;
use graph_agent::reasoner::{Method, QuerySource};
use graph_agent::synthetic::biomedical_fixture;

fn run(method: Method) -> Vec<graph_agent::reasoner::ReasoningTrace> {
    let g = biomedical_fixture(11);
    let stats = degree_stats(&g);
    let def = TaskDefinition::LinkPrediction {
        src_type: "drug".into(),
        dst_type: "gene".into(),
    };
    let settings = EvalSettings {
        seed: 3,
        method,
        ..EvalSettings::default()
    };
    let prepared = prepare_task(&g, &def, 3).unwrap();
    let emb = HashingEmbedder::new(64);
    let store = build_memory(&g, &stats, &prepared, &settings, QuerySource::Lm(&emb)).unwrap();
    let mock = ScriptedMock::always("TRUE");
    evaluate(&g, &stats, &prepared, &store, &settings, QuerySource::Lm(&emb), &mock).unwrap().traces
}

#[test]
fn cot_examples_are_fixed_across_targets() {
    let traces = run(Method::KShotCot);
    let first = traces[0].example_set.ids();
    assert!(!first.is_empty());
    for t in &traces {
        assert_eq!(t.example_set.ids(), first);
        assert!(t.inductive_prompt.is_none() && t.induced_reasons.is_none());
        assert!(!t.deductive_prompt.as_deref().unwrap().contains("Reasons:"));
    }
}

#[test]
fn simple_ask_has_no_examples() {
    for t in run(Method::SimpleAsk) {
        assert!(t.example_set.examples.is_empty());
        let p = t.deductive_prompt.unwrap();
        assert!(p.starts_with("Target:\n") && !p.contains("Examples:"));
    }
}

#[test]
fn graph_agent_calls_twice_per_target() {
    let traces = run(Method::GraphAgent);
    for t in &traces {
        assert!(t.inductive_prompt.is_some());
        assert_eq!(t.induced_reasons.as_deref(), Some("TRUE"));
        assert!(t.deductive_prompt.as_deref().unwrap().contains("Reasons:\nTRUE"));
    }
}
