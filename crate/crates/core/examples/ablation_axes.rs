//! Sweeps hop depth and memory provenance on the biomedical fixture.

use graph_agent::encoder::EncoderConfig;
use graph_agent::evaluator::{build_memory, evaluate, prepare_task, EvalSettings, ReportMetrics, RunReport, TaskDefinition};
use graph_agent::graph::{degree_stats, Graph};
use graph_agent::llm::MajorityLabelMock;
use graph_agent::memory::HashingEmbedder;
use graph_agent::reasoner::QuerySource;
use graph_agent::synthetic::{biomedical_fixture, structural_embeddings};

fn run(g: &Graph, hops: usize, source: QuerySource<'_>) -> anyhow::Result<(RunReport, usize)> {
    let stats = degree_stats(g);
    let settings = EvalSettings {
        seed: 4,
        encoder: EncoderConfig {
            hops,
            ..EncoderConfig::biomedical()
        },
        ..EvalSettings::default()
    };
    let prepared = prepare_task(g, &TaskDefinition::NodeClassification { node_type: None }, settings.seed)?;
    let store = build_memory(g, &stats, &prepared, &settings, source)?;
    let out = evaluate(g, &stats, &prepared, &store, &settings, source, &MajorityLabelMock::new())?;
    Ok((out.report, store.dim()))
}

fn main() -> anyhow::Result<()> {
    let g = biomedical_fixture(11);
    let lm = HashingEmbedder::new(256);
    let gnn = structural_embeddings(&g, 32, 2, 4);
    for (name, source) in [("lm", QuerySource::Lm(&lm)), ("gnn", QuerySource::Gnn(&gnn))] {
        for hops in 1..=3 {
            let (report, dim) = run(&g, hops, source)?;
            if let ReportMetrics::NodeClassification(m) = &report.metrics {
                println!("provenance {name:<3} dim {dim:<3} hops {hops}: accuracy {:.3} over {}", m.accuracy, m.total);
            }
        }
    }
    Ok(())
}
