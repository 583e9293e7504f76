//! Typed property graph: nodes with text attributes and optional labels,
//! typed edges, and an undirected adjacency index for neighbourhood queries.

mod load;
mod negative;
mod split;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use load::{load_graph, load_graph_files, write_graph};
pub use negative::{sample_negative_edges, EdgeSample};
pub use split::{split_dataset, Split, SplitRatios};

/// Opaque node identifier, unique within a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub node_type: String,
    /// Attribute pairs in dataset file order; keys are unique.
    pub attributes: Vec<(String, String)>,
    pub label: Option<String>,
}

impl Node {
    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub edge_type: String,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{source_name}:{line}: malformed record: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(NodeId),
    #[error("edge {src} -> {dst} (line {line}) references unknown node `{missing}`")]
    DanglingEdge {
        line: usize,
        src: NodeId,
        dst: NodeId,
        missing: NodeId,
    },
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("hop count must be at least 1")]
    ZeroHops,
    #[error("split ratios must be positive and sum to 1 (got {0:?})")]
    RatioSumInvalid([f64; 3]),
    #[error("cannot draw {requested} negative pairs: only {available} non-adjacent pairs exist")]
    InsufficientNegativeSpace { requested: usize, available: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Immutable graph. Adjacency holds one `(neighbour, edge index)` entry per
/// edge incidence, so a self-loop appears twice in its node's list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    nodes: Vec<Node>,
    index: HashMap<NodeId, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph from in-memory parts, applying the same validation as
    /// the file loader.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNodeId(node.id.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            let lookup = |id: &NodeId| {
                index.get(id).copied().ok_or_else(|| GraphError::DanglingEdge {
                    line: e + 1,
                    src: edge.src.clone(),
                    dst: edge.dst.clone(),
                    missing: id.clone(),
                })
            };
            let s = lookup(&edge.src)?;
            let d = lookup(&edge.dst)?;
            adjacency[s].push((d, e));
            adjacency[d].push((s, e));
        }
        Ok(Self {
            nodes,
            index,
            edges,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn require(&self, id: &NodeId) -> Result<&Node, GraphError> {
        self.node(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn degree(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).map(|&i| self.adjacency[i].len())
    }

    pub fn nodes_of_type<'a>(&'a self, node_type: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.iter().filter(move |n| n.node_type == node_type)
    }

    /// True when any edge, of any type and either orientation, joins `a` and `b`.
    pub fn has_edge_between(&self, a: &NodeId, b: &NodeId) -> bool {
        let (Some(&ia), Some(&ib)) = (self.index.get(a), self.index.get(b)) else {
            return false;
        };
        let (small, other) = if self.adjacency[ia].len() <= self.adjacency[ib].len() {
            (ia, ib)
        } else {
            (ib, ia)
        };
        self.adjacency[small].iter().any(|&(n, _)| n == other)
    }

    /// Node counts per type, sorted by type name.
    pub fn type_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            *out.entry(n.node_type.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Edge counts per edge type, sorted by type name.
    pub fn edge_type_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            *out.entry(e.edge_type.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Breadth-first neighbourhood of `v` up to `hops`, each node reported
    /// once at its minimum distance. `v` itself is excluded.
    pub fn n_hop_neighbors(&self, v: &NodeId, hops: usize) -> Result<Vec<(NodeId, usize)>, GraphError> {
        self.n_hop_neighbors_excluding(v, hops, None)
    }

    /// Like [`Graph::n_hop_neighbors`], but ignores every edge joining the
    /// two nodes of `blocked`. Edge encodings use this so a candidate pair's
    /// own connection never shows up in its neighbourhood.
    pub fn n_hop_neighbors_excluding(
        &self,
        v: &NodeId,
        hops: usize,
        blocked: Option<(&NodeId, &NodeId)>,
    ) -> Result<Vec<(NodeId, usize)>, GraphError> {
        if hops == 0 {
            return Err(GraphError::ZeroHops);
        }
        let start = *self
            .index
            .get(v)
            .ok_or_else(|| GraphError::UnknownNode(v.clone()))?;
        let blocked = blocked.and_then(|(a, b)| Some((*self.index.get(a)?, *self.index.get(b)?)));
        let is_blocked = |x: usize, y: usize| match blocked {
            Some((a, b)) => (x == a && y == b) || (x == b && y == a),
            None => false,
        };

        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut out = Vec::new();
        while let Some(cur) = queue.pop_front() {
            let d = dist[cur];
            if d == hops {
                continue;
            }
            for &(n, _) in &self.adjacency[cur] {
                if dist[n] != usize::MAX || is_blocked(cur, n) {
                    continue;
                }
                dist[n] = d + 1;
                out.push((self.nodes[n].id.clone(), d + 1));
                queue.push_back(n);
            }
        }
        Ok(out)
    }
}

/// Degree of every node and the mean degree per node type.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DegreeStats {
    pub degree: HashMap<NodeId, usize>,
    pub node_type: HashMap<NodeId, String>,
    pub avg_degree_by_type: BTreeMap<String, f64>,
}

impl DegreeStats {
    pub fn degree_of(&self, id: &NodeId) -> Option<usize> {
        self.degree.get(id).copied()
    }

    pub fn type_average(&self, node_type: &str) -> Option<f64> {
        self.avg_degree_by_type.get(node_type).copied()
    }
}

/// Degree counts every incident edge, across all edge types, with
/// multiplicity. Computed over the whole graph structure.
pub fn degree_stats(g: &Graph) -> DegreeStats {
    let mut degree = HashMap::with_capacity(g.node_count());
    let mut node_type = HashMap::with_capacity(g.node_count());
    let mut sums: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (i, node) in g.nodes.iter().enumerate() {
        let d = g.adjacency[i].len();
        degree.insert(node.id.clone(), d);
        node_type.insert(node.id.clone(), node.node_type.clone());
        let entry = sums.entry(node.node_type.clone()).or_insert((0, 0));
        entry.0 += d;
        entry.1 += 1;
    }
    let avg_degree_by_type = sums
        .into_iter()
        .map(|(t, (total, count))| (t, total as f64 / count as f64))
        .collect();
    DegreeStats {
        degree,
        node_type,
        avg_degree_by_type,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn node(id: &str, ty: &str) -> Node {
        Node {
            id: NodeId::new(id),
            node_type: ty.into(),
            attributes: vec![("name".into(), format!("{id} name"))],
            label: None,
        }
    }

    pub(crate) fn edge(a: &str, b: &str) -> Edge {
        Edge {
            src: a.into(),
            dst: b.into(),
            edge_type: "rel".into(),
        }
    }

    fn path_abc() -> Graph {
        Graph::from_parts(
            vec![node("a", "t"), node("b", "t"), node("c", "t")],
            vec![edge("a", "b"), edge("b", "c")],
        )
        .unwrap()
    }

    #[test]
    fn triangle_degrees() {
        let g = Graph::from_parts(
            vec![node("a", "t"), node("b", "t"), node("c", "t")],
            vec![edge("a", "b"), edge("b", "c"), edge("c", "a")],
        )
        .unwrap();
        let s = degree_stats(&g);
        assert!(s.degree.values().all(|&d| d == 2));
        assert_eq!(s.type_average("t"), Some(2.0));
    }

    #[test]
    fn isolated_node_stats() {
        let g = Graph::from_parts(vec![node("a", "t")], vec![]).unwrap();
        let s = degree_stats(&g);
        assert_eq!(s.degree_of(&"a".into()), Some(0));
        assert_eq!(s.type_average("t"), Some(0.0));
        assert_eq!(g.n_hop_neighbors(&"a".into(), 3).unwrap(), vec![]);
    }

    #[test]
    fn per_type_means() {
        // drugs d1 (1), d2 (3); genes g1 (1), g2 (3)
        let g = Graph::from_parts(
            vec![node("d1", "drug"), node("d2", "drug"), node("g1", "gene"), node("g2", "gene")],
            vec![edge("d1", "g2"), edge("d2", "g2"), edge("d2", "g1"), edge("d2", "g2")],
        )
        .unwrap();
        let s = degree_stats(&g);
        assert_eq!(s.degree_of(&"d2".into()), Some(3));
        assert_eq!(s.degree_of(&"g2".into()), Some(3));
        assert_eq!(s.type_average("drug"), Some(2.0));
        assert_eq!(s.type_average("gene"), Some(2.0));
        assert!(s.type_average("disease").is_none());
    }

    #[test]
    fn path_neighbors() {
        let g = path_abc();
        assert_eq!(g.n_hop_neighbors(&"a".into(), 1).unwrap(), vec![("b".into(), 1)]);
        assert_eq!(
            g.n_hop_neighbors(&"a".into(), 2).unwrap(),
            vec![("b".into(), 1), ("c".into(), 2)]
        );
        assert!(matches!(g.n_hop_neighbors(&"z".into(), 1), Err(GraphError::UnknownNode(_))));
        assert!(matches!(g.n_hop_neighbors(&"a".into(), 0), Err(GraphError::ZeroHops)));
    }

    #[test]
    fn blocked_pair_hides_direct_link() {
        let g = path_abc();
        let a: NodeId = "a".into();
        let b: NodeId = "b".into();
        assert!(g.n_hop_neighbors_excluding(&a, 2, Some((&a, &b))).unwrap().is_empty());
        assert!(g.has_edge_between(&b, &a));
        assert!(!g.has_edge_between(&a, &"c".into()));
    }

    #[test]
    fn self_loop_counts_twice() {
        let g = Graph::from_parts(vec![node("a", "t")], vec![edge("a", "a")]).unwrap();
        assert_eq!(g.degree(&"a".into()), Some(2));
        assert!(g.n_hop_neighbors(&"a".into(), 1).unwrap().is_empty());
    }

    #[test]
    fn dangling_and_duplicate() {
        let err = Graph::from_parts(
            vec![node("a", "t"), node("b", "t"), node("c", "t")],
            vec![edge("a", "z")],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DanglingEdge { ref missing, .. } if missing.as_str() == "z"));
        let err = Graph::from_parts(vec![node("a", "t"), node("a", "t")], vec![]).unwrap_err();
        assert!(matches!(err, GraphError::DuplicateNodeId(_)));
    }
}
