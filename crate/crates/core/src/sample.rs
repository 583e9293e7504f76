use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Identity of a prediction sample: a node, or a (possibly non-existent)
/// edge between two nodes. Orders nodes before edges, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleId {
    Node(NodeId),
    Edge(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Node,
    Edge,
}

impl SampleId {
    pub fn node(id: impl Into<NodeId>) -> Self {
        Self::Node(id.into())
    }

    pub fn edge(src: impl Into<NodeId>, dst: impl Into<NodeId>) -> Self {
        Self::Edge(src.into(), dst.into())
    }

    pub fn kind(&self) -> SampleKind {
        match self {
            Self::Node(_) => SampleKind::Node,
            Self::Edge(..) => SampleKind::Edge,
        }
    }

    /// Nodes the sample is about: one for a node, both endpoints for an edge.
    pub fn endpoints(&self) -> Vec<&NodeId> {
        match self {
            Self::Node(n) => vec![n],
            Self::Edge(a, b) => vec![a, b],
        }
    }

    pub fn shares_node_with(&self, other: &SampleId) -> bool {
        let mine = self.endpoints();
        other.endpoints().iter().any(|n| mine.contains(n))
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Node(n) => write!(f, "{n}"),
            Self::Edge(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl FromStr for SampleId {
    type Err = String;

    /// Accepts `id`, `(a, b)` or `a,b`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty sample id".into());
        }
        let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')'));
        match inner.unwrap_or(s).split_once(',') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok(Self::edge(a.trim(), b.trim()))
            }
            Some(_) => Err(format!("malformed edge id `{s}`")),
            None if inner.is_some() => Err(format!("malformed edge id `{s}`")),
            None => Ok(Self::node(s)),
        }
    }
}
