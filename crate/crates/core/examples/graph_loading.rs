//! Round-trips a graph through JSON lines and inspects its structure.
//!
//! `cargo run --example graph_loading -- DIR` also writes the fixture to
//! `DIR/nodes.jsonl` and `DIR/edges.jsonl`.

use graph_agent::graph::{degree_stats, load_graph, sample_negative_edges, write_graph, NodeId};
use graph_agent::synthetic::biomedical_fixture;

fn main() -> anyhow::Result<()> {
    let g = biomedical_fixture(11);
    let (mut nodes, mut edges) = (Vec::new(), Vec::new());
    write_graph(&g, &mut nodes, &mut edges)?;
    println!("{}", String::from_utf8_lossy(&nodes).lines().next().unwrap_or_default());

    let loaded = load_graph(nodes.as_slice(), edges.as_slice())?;
    assert_eq!(loaded, g);
    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(format!("{dir}/nodes.jsonl"), &nodes)?;
        std::fs::write(format!("{dir}/edges.jsonl"), &edges)?;
        println!("wrote {dir}/nodes.jsonl and {dir}/edges.jsonl");
    }
    print!("{}", graph_agent::cli::cmd_ingest(&loaded)?);

    let stats = degree_stats(&loaded);
    let drug = NodeId::new("dr1");
    println!("\ndegree of dr1: {:?}, drug mean {:.2}", stats.degree_of(&drug), stats.type_average("drug").unwrap_or(0.0));
    for (id, hop) in loaded.n_hop_neighbors(&drug, 2)?.iter().take(8) {
        println!("  hop {hop}: {id}");
    }

    let negatives = sample_negative_edges(&loaded, "drug", "gene", 5, 0)?;
    println!("\nnon-adjacent drug-gene pairs:");
    for e in negatives {
        println!("  ({}, {})", e.src, e.dst);
    }
    Ok(())
}
