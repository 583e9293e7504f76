//! Compares the three prompting methods on drug-gene link prediction.
//!
//! The backend is a local heuristic: it predicts a link when both target
//! endpoints carry the same group word in their name.

use graph_agent::encoder::EncoderConfig;
use graph_agent::evaluator::{run_link_prediction, EvalSettings, ReportMetrics};
use graph_agent::llm::{ChatBackend, ChatRequest, ChatResponse, LlmError};
use graph_agent::memory::HashingEmbedder;
use graph_agent::reasoner::{Method, QuerySource};
use graph_agent::synthetic::biomedical_fixture;

struct SameGroup;

impl ChatBackend for SameGroup {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let Some(target) = req.user_text.rsplit("Target:\n").next().filter(|_| req.user_text.contains("Target:\n")) else {
            return Ok(ChatResponse::complete("1. Drugs act on genes in the same functional group."));
        };
        let words: Vec<&str> = target
            .lines()
            .skip_while(|l| *l != "attributes:")
            .skip(1)
            .take(2)
            .filter_map(|l| l.split_whitespace().last())
            .collect();
        let same = words.len() == 2 && words[0] == words[1];
        Ok(ChatResponse::complete(if same { "TRUE" } else { "FALSE" }))
    }
}

fn main() -> anyhow::Result<()> {
    let g = biomedical_fixture(11);
    let embedder = HashingEmbedder::new(256);
    for method in [Method::GraphAgent, Method::KShotCot, Method::SimpleAsk] {
        let settings = EvalSettings {
            seed: 2,
            method,
            encoder: EncoderConfig::biomedical(),
            ..EvalSettings::default()
        };
        let out = run_link_prediction(&g, "drug", "gene", &settings, QuerySource::Lm(&embedder), &SameGroup)?;
        if let ReportMetrics::LinkPrediction { overall, .. } = &out.report.metrics {
            println!(
                "{method:?}: precision {:.3} recall {:.3} f1 {:.3} accuracy {:.3} ({} samples)",
                overall.precision, overall.recall, overall.f1, overall.accuracy, overall.total
            );
        }
    }
    Ok(())
}
