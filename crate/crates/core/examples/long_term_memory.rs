//! Builds an embedding store from labelled nodes, persists it and queries it.

use std::collections::HashMap;

use graph_agent::encoder::{Encoder, EncoderConfig};
use graph_agent::graph::degree_stats;
use graph_agent::memory::{memorize, retrieve_similar, EmbeddingVector, HashingEmbedder, MemorizeOptions, MemoryStore};
use graph_agent::sample::SampleId;
use graph_agent::synthetic::citation_fixture;

fn main() -> anyhow::Result<()> {
    let g = citation_fixture(4);
    let stats = degree_stats(&g);
    let enc = Encoder::new(&g, &stats, EncoderConfig::citation());

    let (train, query) = g.nodes().split_at(16);
    let samples = train
        .iter()
        .map(|n| enc.encode_node(&n.id, &[n.id.clone()]))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: HashMap<SampleId, String> =
        train.iter().map(|n| (SampleId::Node(n.id.clone()), n.label.clone().unwrap_or_default())).collect();

    let embedder = HashingEmbedder::new(256);
    let store = memorize(&samples, &labels, &embedder, &MemorizeOptions::default())?;
    let dir = std::env::temp_dir().join("graph-agent-memory-example");
    store.save(&dir)?;
    let store = MemoryStore::load(&dir)?;
    println!("{} records, dim {}, saved under {}", store.len(), store.dim(), dir.display());

    for n in query {
        let text = enc.encode_node(&n.id, &[n.id.clone()])?.text;
        let q = EmbeddingVector::new(embedder.embed_one(&text))?;
        let found = retrieve_similar(&store, &q, 3, |_| true)?;
        let hits: Vec<String> =
            found.hits.iter().map(|h| format!("{} {} {:.3}", h.record.sample_id, h.record.label, h.similarity)).collect();
        println!("{} ({}): {}", n.id, n.label.as_deref().unwrap_or("?"), hits.join(", "));
    }
    Ok(())
}
