//! Small deterministic graphs for tests, examples and smoke runs.
//!
//! Labels (`CLASS_A`, ...) never occur in attribute text, so a label string
//! showing up in a prompt can only come from an example or neighbour label.

use std::collections::HashSet;

use crate::graph::{Edge, Graph, Node, NodeId};
use crate::memory::GnnEmbeddings;
use crate::rng::SplitMix64;

pub const CLASSES: [&str; 3] = ["CLASS_A", "CLASS_B", "CLASS_C"];

const GROUP_WORDS: [&str; 3] = ["kinase inflammation signalling", "membrane transport channel", "metabolic oxidation enzyme"];

fn node(id: String, node_type: &str, name: String, description: String, group: usize) -> Node {
    Node {
        id: NodeId::new(id),
        node_type: node_type.to_string(),
        attributes: vec![("name".into(), name), ("description".into(), description)],
        label: Some(CLASSES[group].to_string()),
    }
}

/// 60 nodes (15 drug, 20 gene, 10 pathway, 15 disease) and 150 edges, 50
/// of them drug–gene. Nodes fall into three groups; most edges stay inside
/// a group and every node carries its group's class label.
pub fn biomedical_fixture(seed: u64) -> Graph {
    let mut rng = SplitMix64::new(seed);
    let spec = [("drug", "dr", 15), ("gene", "g", 20), ("pathway", "pw", 10), ("disease", "ds", 15)];
    let mut nodes = Vec::new();
    let mut by_type: Vec<Vec<(NodeId, usize)>> = Vec::new();
    for (t, prefix, count) in spec {
        let mut ids = Vec::new();
        for i in 0..count {
            let group = i % 3;
            let id = format!("{prefix}{}", i + 1);
            let name = format!("{t} {} {}", i + 1, GROUP_WORDS[group].split(' ').next().unwrap_or(""));
            let description = format!("synthetic {t} involved in {}", GROUP_WORDS[group]);
            nodes.push(node(id.clone(), t, name, description, group));
            ids.push((NodeId::new(id), group));
        }
        by_type.push(ids);
    }

    // (src type, dst type, edge type, count)
    let plan = [(0, 1, "targets", 50), (1, 2, "participates_in", 40), (1, 3, "associated_with", 35), (0, 3, "indicated_for", 25)];
    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut edges = Vec::new();
    for (si, di, et, count) in plan {
        let (srcs, dsts) = (&by_type[si], &by_type[di]);
        let mut made = 0;
        while made < count {
            let (s, sg) = &srcs[rng.below(srcs.len())];
            let intra = rng.below(10) < 8;
            let pool: Vec<&(NodeId, usize)> = dsts.iter().filter(|(_, g)| (g == sg) == intra).collect();
            let (d, _) = pool[rng.below(pool.len())];
            if seen.insert((s.clone(), d.clone())) {
                edges.push(Edge {
                    src: s.clone(),
                    dst: d.clone(),
                    edge_type: et.to_string(),
                });
                made += 1;
            }
        }
    }
    Graph::from_parts(nodes, edges).expect("fixture is well formed")
}

/// 20 papers in three topics with ~40 citations, mostly within a topic.
pub fn citation_fixture(seed: u64) -> Graph {
    let topics = [
        ("graph kernels and spectral methods", "spectral", "Ada"),
        ("recurrent networks for sequence tagging", "sequence", "Bo"),
        ("decision rules learned from relational data", "relational", "Cy"),
    ];
    let mut rng = SplitMix64::new(seed);
    let mut nodes = Vec::new();
    for i in 0..20 {
        let g = i % 3;
        let (title, kw, author) = topics[g];
        nodes.push(Node {
            id: NodeId::new(format!("p{}", i + 1)),
            node_type: "paper".into(),
            attributes: vec![
                ("title".into(), format!("On {title}, part {}", i + 1)),
                ("abstract".into(), format!("We study {title} and report results on {kw} benchmarks.")),
                ("authors".into(), format!("{author} {}", (i % 4) + 1)),
                ("keywords".into(), kw.to_string()),
            ],
            label: Some(CLASSES[g].to_string()),
        });
    }
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    while edges.len() < 40 {
        let a = rng.below(20);
        let b = if rng.below(10) < 8 {
            let same: Vec<usize> = (0..20).filter(|j| j % 3 == a % 3 && *j != a).collect();
            same[rng.below(same.len())]
        } else {
            rng.below(20)
        };
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push(Edge {
            src: nodes[a].id.clone(),
            dst: nodes[b].id.clone(),
            edge_type: "cites".into(),
        });
    }
    Graph::from_parts(nodes, edges).expect("fixture is well formed")
}

fn unit(rng: &mut SplitMix64) -> f32 {
    (rng.next_u64() >> 40) as f32 / (1u64 << 24) as f32 * 2.0 - 1.0
}

/// Stand-in for trained GNN vectors: random node features averaged with
/// their neighbours' for `rounds` propagation steps.
pub fn structural_embeddings(g: &Graph, dim: usize, rounds: usize, seed: u64) -> GnnEmbeddings {
    let mut rng = SplitMix64::new(seed);
    let ids: Vec<&NodeId> = g.nodes().iter().map(|n| &n.id).collect();
    let mut feats: Vec<Vec<f32>> = ids.iter().map(|_| (0..dim).map(|_| unit(&mut rng)).collect()).collect();
    let index: std::collections::HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    for _ in 0..rounds {
        let next: Vec<Vec<f32>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let mut acc = feats[i].clone();
                let nbrs = g.n_hop_neighbors(id, 1).unwrap_or_default();
                for (n, _) in &nbrs {
                    for (a, b) in acc.iter_mut().zip(&feats[index[n]]) {
                        *a += b;
                    }
                }
                let scale = 1.0 / (nbrs.len() + 1) as f32;
                acc.iter().map(|v| v * scale).collect()
            })
            .collect();
        feats = next;
    }
    GnnEmbeddings::from_vectors(ids.into_iter().cloned().zip(feats)).expect("finite nonzero features")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biomedical_shape() {
        let g = biomedical_fixture(1);
        assert_eq!((g.node_count(), g.edge_count()), (60, 150));
        assert_eq!(g.edge_type_counts()["targets"], 50);
        assert_eq!(g, biomedical_fixture(1));
        for n in g.nodes() {
            for (_, v) in &n.attributes {
                assert!(!v.contains("CLASS_"));
            }
        }
    }

    #[test]
    fn citation_shape_and_vectors() {
        let g = citation_fixture(3);
        assert_eq!((g.node_count(), g.edge_count()), (20, 40));
        let e = structural_embeddings(&g, 8, 2, 5);
        assert_eq!((e.len(), e.node_dim()), (20, 8));
    }
}
