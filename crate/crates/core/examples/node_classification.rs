//! Node classification on the citation fixture with the offline majority mock.
//!
//! The mock answers with the majority label of the retrieved examples, so
//! accuracy here measures retrieval quality, not reasoning.

use graph_agent::encoder::EncoderConfig;
use graph_agent::evaluator::{run_node_classification, EvalSettings};
use graph_agent::llm::MajorityLabelMock;
use graph_agent::memory::HashingEmbedder;
use graph_agent::reasoner::QuerySource;
use graph_agent::synthetic::citation_fixture;

fn main() -> anyhow::Result<()> {
    let g = citation_fixture(4);
    let settings = EvalSettings {
        seed: 1,
        encoder: EncoderConfig::citation(),
        ..EvalSettings::default()
    };
    let embedder = HashingEmbedder::new(256);
    let out = run_node_classification(&g, Some("paper"), &settings, QuerySource::Lm(&embedder), &MajorityLabelMock::new())?;
    print!("{}", out.report.to_table());
    if let Some(t) = out.traces.first() {
        println!("\nfirst deductive prompt:\n{}", t.deductive_prompt.as_deref().unwrap_or_default());
    }
    Ok(())
}
