//! Graph-to-text encoding of nodes and candidate edges.
//!
//! Output is line oriented so prompts diff cleanly:
//!
//! ```text
//! node: p12
//! type: paper
//! attributes:
//! title: ...
//! 1-hop-neighbours:
//! - paper | p3 | title: ...; authors: ... | label: Theory
//! ```
//!
//! Each hop gets its own neighbour section, sampled independently by degree
//! importance. Links among the listed neighbours are never rendered.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::graph::{DegreeStats, Graph, GraphError, Node, NodeId};
use crate::sample::{SampleId, SampleKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub hops: usize,
    pub top_k: usize,
    /// Attribute keys rendered for the encoded node(s). Empty renders all.
    pub attribute_keys_target: Vec<String>,
    /// Attribute keys rendered for each listed neighbour. Empty renders all.
    pub attribute_keys_neighbor: Vec<String>,
    pub mask_target_label: bool,
    /// Per-value character budget for target attributes.
    pub target_char_budget: usize,
    /// Per-value character budget for neighbour attributes.
    pub neighbor_char_budget: usize,
    /// Append visible neighbour labels to neighbour lines.
    pub neighbor_labels: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            hops: 1,
            top_k: 8,
            attribute_keys_target: Vec::new(),
            attribute_keys_neighbor: Vec::new(),
            mask_target_label: true,
            target_char_budget: 1200,
            neighbor_char_budget: 300,
            neighbor_labels: true,
        }
    }
}

impl EncoderConfig {
    /// Text-attributed citation graphs: rich target text, title/authors for
    /// neighbours, top 8 neighbours.
    pub fn citation() -> Self {
        Self {
            attribute_keys_target: ["title", "abstract", "authors", "keywords"].map(String::from).to_vec(),
            attribute_keys_neighbor: ["title", "authors"].map(String::from).to_vec(),
            ..Self::default()
        }
    }

    /// Biomedical knowledge graphs: names and types only, top 15 neighbours.
    pub fn biomedical() -> Self {
        Self {
            top_k: 15,
            attribute_keys_target: vec!["name".into()],
            attribute_keys_neighbor: vec!["name".into()],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.hops == 0 {
            return Err(GraphError::ZeroHops);
        }
        Ok(())
    }
}

/// Which node labels may appear on neighbour lines.
#[derive(Debug, Clone, Default)]
pub enum LabelVisibility {
    #[default]
    All,
    /// Only labels of these nodes (typically the training split).
    Only(HashSet<NodeId>),
    Hidden,
}

impl LabelVisibility {
    fn allows(&self, id: &NodeId) -> bool {
        match self {
            Self::All => true,
            Self::Only(set) => set.contains(id),
            Self::Hidden => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedSample {
    pub sample_id: SampleId,
    pub kind: SampleKind,
    pub text: String,
    pub neighbor_ids_used: Vec<NodeId>,
}

/// Degree relative to the mean degree of the node's type; 0 when that mean is 0.
pub fn importance(stats: &DegreeStats, n: &NodeId) -> Result<f64, GraphError> {
    let degree = stats.degree_of(n).ok_or_else(|| GraphError::UnknownNode(n.clone()))?;
    let avg = stats
        .node_type
        .get(n)
        .and_then(|t| stats.type_average(t))
        .unwrap_or(0.0);
    Ok(if avg > 0.0 { degree as f64 / avg } else { 0.0 })
}

/// The `k` candidates of highest importance, descending, ties by ascending id.
pub fn sample_neighbors(candidates: &[NodeId], stats: &DegreeStats, k: usize) -> Vec<NodeId> {
    let mut scored: Vec<(f64, &NodeId)> = candidates
        .iter()
        .map(|n| (importance(stats, n).unwrap_or(0.0), n))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, n)| n.clone()).collect()
}

fn clip(value: &str, budget: usize) -> String {
    let flat: String = value
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect();
    let flat = flat.trim();
    if flat.chars().count() <= budget {
        flat.to_string()
    } else {
        let mut out: String = flat.chars().take(budget).collect();
        out.push_str("...");
        out
    }
}

fn selected_attributes<'n>(node: &'n Node, keys: &[String]) -> impl Iterator<Item = &'n (String, String)> {
    let keys = keys.to_vec();
    node.attributes
        .iter()
        .filter(move |(k, _)| keys.is_empty() || keys.iter().any(|w| w == k))
}

/// Stateless encoder bound to one graph, its degree statistics and a config.
pub struct Encoder<'g> {
    graph: &'g Graph,
    stats: &'g DegreeStats,
    cfg: EncoderConfig,
    visibility: LabelVisibility,
}

impl<'g> Encoder<'g> {
    pub fn new(graph: &'g Graph, stats: &'g DegreeStats, cfg: EncoderConfig) -> Self {
        Self {
            graph,
            stats,
            cfg,
            visibility: LabelVisibility::All,
        }
    }

    pub fn with_visibility(mut self, visibility: LabelVisibility) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    /// Same encoder with a different neighbour budget.
    pub fn with_top_k(&self, top_k: usize) -> Encoder<'g> {
        Encoder {
            graph: self.graph,
            stats: self.stats,
            cfg: EncoderConfig { top_k, ..self.cfg.clone() },
            visibility: self.visibility.clone(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Encodes a sample of either kind; `masked` nodes never show a label.
    pub fn encode(&self, id: &SampleId, masked: &[NodeId]) -> Result<EncodedSample, GraphError> {
        match id {
            SampleId::Node(v) => self.encode_node(v, masked),
            SampleId::Edge(x, y) => self.encode_edge(x, y, masked),
        }
    }

    pub fn encode_node(&self, v: &NodeId, masked: &[NodeId]) -> Result<EncodedSample, GraphError> {
        self.cfg.validate()?;
        let node = self.graph.require(v)?;
        let mut text = format!("node: {}\ntype: {}\nattributes:\n", node.id, node.node_type);
        self.push_attributes(&mut text, node, "");
        if !self.cfg.mask_target_label && !masked.contains(v) {
            if let Some(label) = &node.label {
                text.push_str(&format!("label: {label}\n"));
            }
        }
        let mut hidden: Vec<NodeId> = masked.to_vec();
        if self.cfg.mask_target_label {
            hidden.push(v.clone());
        }
        let mut used = Vec::new();
        self.push_neighbourhood(&mut text, v, None, "", &hidden, &mut used)?;
        Ok(EncodedSample {
            sample_id: SampleId::Node(v.clone()),
            kind: SampleKind::Node,
            text: text.trim_end().to_string(),
            neighbor_ids_used: used,
        })
    }

    /// Encodes the pair `(x, y)`, which need not be an existing edge. Any
    /// edge joining `x` and `y` is ignored while collecting neighbourhoods,
    /// so neither endpoint appears in the other's neighbour list.
    pub fn encode_edge(&self, x: &NodeId, y: &NodeId, masked: &[NodeId]) -> Result<EncodedSample, GraphError> {
        self.cfg.validate()?;
        let nx = self.graph.require(x)?;
        let ny = self.graph.require(y)?;
        let mut text = format!("edge: ({x}, {y})\nattributes:\n");
        for n in [nx, ny] {
            let attrs: Vec<String> = selected_attributes(n, &self.cfg.attribute_keys_target)
                .map(|(k, v)| format!("{k}: {}", clip(v, self.cfg.target_char_budget)))
                .collect();
            text.push_str(&format!("{}: type: {}", n.id, n.node_type));
            for a in attrs {
                text.push_str("; ");
                text.push_str(&a);
            }
            text.push('\n');
        }
        let mut hidden: Vec<NodeId> = masked.to_vec();
        if self.cfg.mask_target_label {
            hidden.extend([x.clone(), y.clone()]);
        }
        let mut used = Vec::new();
        self.push_neighbourhood(&mut text, y, Some((x, y)), &format!("{y}-"), &hidden, &mut used)?;
        self.push_neighbourhood(&mut text, x, Some((x, y)), &format!("{x}-"), &hidden, &mut used)?;
        Ok(EncodedSample {
            sample_id: SampleId::Edge(x.clone(), y.clone()),
            kind: SampleKind::Edge,
            text: text.trim_end().to_string(),
            neighbor_ids_used: used,
        })
    }

    fn push_attributes(&self, text: &mut String, node: &Node, indent: &str) {
        for (k, v) in selected_attributes(node, &self.cfg.attribute_keys_target) {
            text.push_str(&format!("{indent}{k}: {}\n", clip(v, self.cfg.target_char_budget)));
        }
    }

    fn push_neighbourhood(
        &self,
        text: &mut String,
        center: &NodeId,
        blocked: Option<(&NodeId, &NodeId)>,
        prefix: &str,
        hidden: &[NodeId],
        used: &mut Vec<NodeId>,
    ) -> Result<(), GraphError> {
        let mut by_hop: BTreeMap<usize, Vec<NodeId>> = (1..=self.cfg.hops).map(|h| (h, Vec::new())).collect();
        for (n, hop) in self.graph.n_hop_neighbors_excluding(center, self.cfg.hops, blocked)? {
            by_hop.entry(hop).or_default().push(n);
        }
        for (hop, candidates) in by_hop {
            text.push_str(&format!("{prefix}{hop}-hop-neighbours:\n"));
            for id in sample_neighbors(&candidates, self.stats, self.cfg.top_k) {
                let node = self.graph.require(&id)?;
                text.push_str(&self.neighbour_line(node, hidden));
                text.push('\n');
                if !used.contains(&id) {
                    used.push(id);
                }
            }
        }
        Ok(())
    }

    fn neighbour_line(&self, node: &Node, hidden: &[NodeId]) -> String {
        let attrs: Vec<String> = selected_attributes(node, &self.cfg.attribute_keys_neighbor)
            .map(|(k, v)| format!("{k}: {}", clip(v, self.cfg.neighbor_char_budget)))
            .collect();
        let mut line = format!("- {} | {}", node.node_type, node.id);
        if !attrs.is_empty() {
            line.push_str(" | ");
            line.push_str(&attrs.join("; "));
        }
        if self.cfg.neighbor_labels && !hidden.contains(&node.id) && self.visibility.allows(&node.id) {
            if let Some(label) = &node.label {
                line.push_str(&format!(" | label: {label}"));
            }
        }
        line
    }
}

/// Encodes node `v` with every label visible except the target's own.
pub fn encode_node(g: &Graph, stats: &DegreeStats, v: &NodeId, cfg: &EncoderConfig) -> Result<EncodedSample, GraphError> {
    Encoder::new(g, stats, cfg.clone()).encode_node(v, &[])
}

pub fn encode_edge(
    g: &Graph,
    stats: &DegreeStats,
    x: &NodeId,
    y: &NodeId,
    cfg: &EncoderConfig,
) -> Result<EncodedSample, GraphError> {
    Encoder::new(g, stats, cfg.clone()).encode_edge(x, y, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degree_stats, Edge, Node};

    fn n(id: &str, ty: &str, attrs: &[(&str, &str)], label: Option<&str>) -> Node {
        Node {
            id: id.into(),
            node_type: ty.into(),
            attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            label: label.map(String::from),
        }
    }

    fn e(a: &str, b: &str) -> Edge {
        Edge {
            src: a.into(),
            dst: b.into(),
            edge_type: "r".into(),
        }
    }

    fn stats_from(degrees: &[(&str, &str, usize)]) -> DegreeStats {
        let mut s = DegreeStats::default();
        let mut sums: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for (id, ty, d) in degrees {
            s.degree.insert((*id).into(), *d);
            s.node_type.insert((*id).into(), ty.to_string());
            let v = sums.entry(ty.to_string()).or_default();
            v.0 += d;
            v.1 += 1;
        }
        s.avg_degree_by_type = sums.into_iter().map(|(t, (a, c))| (t, a as f64 / c as f64)).collect();
        s
    }

    #[test]
    fn importance_examples() {
        let s = stats_from(&[("a", "t", 4), ("b", "t", 0), ("c", "u", 3)]);
        assert_eq!(importance(&s, &"a".into()).unwrap(), 2.0);
        assert_eq!(importance(&s, &"b".into()).unwrap(), 0.0);
        assert_eq!(importance(&s, &"c".into()).unwrap(), 1.0);
        assert!(importance(&s, &"zz".into()).is_err());
        let zero = stats_from(&[("z", "t", 0)]);
        assert_eq!(importance(&zero, &"z".into()).unwrap(), 0.0);
    }

    #[test]
    fn sampling_order_and_ties() {
        // type t averages 4.0, so a:1.75, b:0.25; c sits at its type mean, 1.0
        let s = stats_from(&[("a", "t", 7), ("b", "t", 1), ("c", "u", 2), ("c2", "u", 2)]);
        let cands: Vec<NodeId> = ["b", "c", "a"].iter().map(|x| (*x).into()).collect();
        assert_eq!(sample_neighbors(&cands, &s, 2), vec![NodeId::from("a"), "c".into()]);
        assert_eq!(sample_neighbors(&cands, &s, 10).len(), 3);
        let tied: Vec<NodeId> = vec!["c2".into(), "c".into()];
        assert_eq!(sample_neighbors(&tied, &s, 1), vec![NodeId::from("c")]);
        assert!(sample_neighbors(&cands, &s, 0).is_empty());
    }

    #[test]
    fn isolated_node_has_empty_sections() {
        let g = Graph::from_parts(vec![n("x", "paper", &[("title", "T")], Some("L"))], vec![]).unwrap();
        let s = degree_stats(&g);
        let cfg = EncoderConfig { hops: 2, ..EncoderConfig::default() };
        let out = encode_node(&g, &s, &"x".into(), &cfg).unwrap();
        assert_eq!(out.text, "node: x\ntype: paper\nattributes:\ntitle: T\n1-hop-neighbours:\n2-hop-neighbours:");
        assert!(out.neighbor_ids_used.is_empty());
    }

    #[test]
    fn star_keeps_highest_importance_leaves() {
        // center c with leaves l1..l4; give l3 and l4 extra edges to boost them.
        let mut nodes = vec![n("c", "hub", &[], None)];
        for i in 1..=4 {
            nodes.push(n(&format!("l{i}"), "leaf", &[], None));
        }
        nodes.push(n("x", "other", &[], None));
        let mut edges: Vec<Edge> = (1..=4).map(|i| e("c", &format!("l{i}"))).collect();
        edges.extend([e("l3", "x"), e("l4", "x"), e("l4", "x"), e("l2", "x")]);
        let g = Graph::from_parts(nodes, edges).unwrap();
        let s = degree_stats(&g);
        let cfg = EncoderConfig { top_k: 3, ..EncoderConfig::default() };
        let out = encode_node(&g, &s, &"c".into(), &cfg).unwrap();
        // degrees: l4=3, l2=2, l3=2, l1=1; oracle: sort by importance then id.
        assert_eq!(out.neighbor_ids_used, vec![NodeId::from("l4"), "l2".into(), "l3".into()]);
        assert_eq!(out.text.lines().filter(|l| l.starts_with("- ")).count(), 3);
    }

    #[test]
    fn citation_neighbours_render_title_authors_type() {
        let attrs = [("title", "Nets"), ("abstract", "Long abstract"), ("authors", "A. B."), ("keywords", "k")];
        let g = Graph::from_parts(
            vec![n("p1", "paper", &attrs, Some("Neural_Networks")), n("p2", "paper", &attrs, Some("Theory"))],
            vec![e("p1", "p2")],
        )
        .unwrap();
        let s = degree_stats(&g);
        let out = encode_node(&g, &s, &"p1".into(), &EncoderConfig::citation()).unwrap();
        assert!(out.text.contains("abstract: Long abstract"));
        assert!(out.text.contains("- paper | p2 | title: Nets; authors: A. B. | label: Theory"));
        assert!(!out.text.contains("Neural_Networks"));
        let unmasked = EncoderConfig {
            mask_target_label: false,
            ..EncoderConfig::citation()
        };
        assert!(encode_node(&g, &s, &"p1".into(), &unmasked).unwrap().text.contains("label: Neural_Networks"));
    }

    #[test]
    fn edge_sections_and_counterpart_removal() {
        let g = Graph::from_parts(
            vec![
                n("d1", "drug", &[("name", "aspirin"), ("smiles", "CC")], None),
                n("g1", "gene", &[("name", "PTGS2")], None),
                n("g2", "gene", &[("name", "PTGS1")], None),
            ],
            vec![e("d1", "g1"), e("d1", "g2")],
        )
        .unwrap();
        let s = degree_stats(&g);
        let out = encode_edge(&g, &s, &"d1".into(), &"g1".into(), &EncoderConfig::biomedical()).unwrap();
        let expected = "edge: (d1, g1)\nattributes:\nd1: type: drug; name: aspirin\ng1: type: gene; name: PTGS2\n\
g1-1-hop-neighbours:\nd1-1-hop-neighbours:\n- gene | g2 | name: PTGS1";
        assert_eq!(out.text, expected);
    }

    #[test]
    fn isolated_edge_endpoints() {
        let g = Graph::from_parts(vec![n("a", "drug", &[], None), n("b", "gene", &[], None)], vec![]).unwrap();
        let s = degree_stats(&g);
        let out = encode_edge(&g, &s, &"a".into(), &"b".into(), &EncoderConfig::default()).unwrap();
        assert_eq!(out.text, "edge: (a, b)\nattributes:\na: type: drug\nb: type: gene\nb-1-hop-neighbours:\na-1-hop-neighbours:");
        assert!(encode_edge(&g, &s, &"a".into(), &"q".into(), &EncoderConfig::default()).is_err());
    }

    #[test]
    fn clipping_budget() {
        assert_eq!(clip("abcdef", 3), "abc...");
        assert_eq!(clip("a\nb", 10), "a b");
    }

    #[test]
    fn masked_neighbour_hides_label() {
        let g = Graph::from_parts(
            vec![n("a", "p", &[], Some("LA")), n("b", "p", &[], Some("LB"))],
            vec![e("a", "b")],
        )
        .unwrap();
        let s = degree_stats(&g);
        let enc = Encoder::new(&g, &s, EncoderConfig::default());
        assert!(enc.encode_node(&"a".into(), &[]).unwrap().text.contains("label: LB"));
        assert!(!enc.encode_node(&"a".into(), &["b".into()]).unwrap().text.contains("LB"));
        let only = Encoder::new(&g, &s, EncoderConfig::default()).with_visibility(LabelVisibility::Only(HashSet::new()));
        assert!(!only.encode_node(&"a".into(), &[]).unwrap().text.contains("LB"));
    }
}
