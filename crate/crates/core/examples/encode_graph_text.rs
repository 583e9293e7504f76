//! Shows node and edge encodings at different hop depths.

use graph_agent::encoder::{Encoder, EncoderConfig};
use graph_agent::graph::{degree_stats, NodeId};
use graph_agent::sample::SampleId;
use graph_agent::synthetic::{biomedical_fixture, citation_fixture};

fn main() -> anyhow::Result<()> {
    let papers = citation_fixture(4);
    let stats = degree_stats(&papers);
    let enc = Encoder::new(&papers, &stats, EncoderConfig::citation());
    let p1 = NodeId::new("p1");
    println!("{}\n", enc.encode_node(&p1, &[p1.clone()])?.text);

    let g = biomedical_fixture(11);
    let stats = degree_stats(&g);
    let edge = g.edges()[0].clone();
    let id = SampleId::edge(edge.src.as_str(), edge.dst.as_str());
    for hops in [1, 2] {
        let cfg = EncoderConfig {
            hops,
            top_k: 4,
            attribute_keys_neighbor: vec!["name".into()],
            ..EncoderConfig::biomedical()
        };
        let encoded = Encoder::new(&g, &stats, cfg).encode(&id, &[edge.src.clone(), edge.dst.clone()])?;
        println!("--- hops = {hops}, {} neighbours used\n{}\n", encoded.neighbor_ids_used.len(), encoded.text);
    }
    Ok(())
}
