use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use super::{Edge, Graph, GraphError, Node, NodeId};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: String,
    #[serde(rename = "type")]
    node_type: String,
    #[serde(default)]
    attributes: Attributes,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    src: String,
    dst: String,
    #[serde(rename = "type")]
    edge_type: String,
}

/// Attribute object kept in file order; duplicate keys are rejected rather
/// than silently overwritten.
#[derive(Default)]
struct Attributes(Vec<(String, String)>);

impl<'de> Deserialize<'de> for Attributes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct AttrVisitor;

        impl<'de> Visitor<'de> for AttrVisitor {
            type Value = Attributes;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object of string attributes")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Attributes, A::Error> {
                let mut out: Vec<(String, String)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    if out.iter().any(|(existing, _)| *existing == k) {
                        return Err(serde::de::Error::custom(format!("duplicate attribute key `{k}`")));
                    }
                    out.push((k, v));
                }
                Ok(Attributes(out))
            }
        }

        deserializer.deserialize_map(AttrVisitor)
    }
}

fn records<'a, R: BufRead + 'a, T: for<'de> Deserialize<'de>>(
    reader: R,
    source_name: &'a str,
) -> impl Iterator<Item = Result<(usize, T), GraphError>> + 'a {
    reader
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(source) => {
                    return Some(Err(GraphError::Io {
                        path: source_name.to_string(),
                        source,
                    }))
                }
            };
            if line.trim().is_empty() {
                return None;
            }
            Some(
                serde_json::from_str::<T>(&line)
                    .map(|r| (line_no, r))
                    .map_err(|e| GraphError::Malformed {
                        source_name: source_name.to_string(),
                        line: line_no,
                        message: e.to_string(),
                    }),
            )
        })
}

/// Reads JSON-lines node and edge streams into a validated [`Graph`].
pub fn load_graph<N: BufRead, E: BufRead>(node_source: N, edge_source: E) -> Result<Graph, GraphError> {
    load_named(node_source, "nodes", edge_source, "edges")
}

pub fn load_graph_files(nodes: &Path, edges: &Path) -> Result<Graph, GraphError> {
    let open = |p: &Path| {
        File::open(p).map(BufReader::new).map_err(|source| GraphError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    load_named(
        open(nodes)?,
        &nodes.display().to_string(),
        open(edges)?,
        &edges.display().to_string(),
    )
}

fn load_named<N: BufRead, E: BufRead>(
    node_source: N,
    node_name: &str,
    edge_source: E,
    edge_name: &str,
) -> Result<Graph, GraphError> {
    let mut nodes = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    for rec in records::<_, NodeRecord>(node_source, node_name) {
        let (line, rec) = rec?;
        let malformed = |message: &str| GraphError::Malformed {
            source_name: node_name.to_string(),
            line,
            message: message.to_string(),
        };
        if rec.id.is_empty() {
            return Err(malformed("node id must be non-empty"));
        }
        if rec.node_type.is_empty() {
            return Err(malformed("node type must be non-empty"));
        }
        if seen.insert(rec.id.clone(), ()).is_some() {
            return Err(GraphError::DuplicateNodeId(NodeId::new(rec.id)));
        }
        nodes.push(Node {
            id: NodeId::new(rec.id),
            node_type: rec.node_type,
            attributes: rec.attributes.0,
            label: rec.label,
        });
    }

    let mut edges = Vec::new();
    for rec in records::<_, EdgeRecord>(edge_source, edge_name) {
        let (line, rec) = rec?;
        for end in [&rec.src, &rec.dst] {
            if !seen.contains_key(end) {
                return Err(GraphError::DanglingEdge {
                    line,
                    src: NodeId::new(rec.src.clone()),
                    dst: NodeId::new(rec.dst.clone()),
                    missing: NodeId::new(end.clone()),
                });
            }
        }
        edges.push(Edge {
            src: NodeId::new(rec.src),
            dst: NodeId::new(rec.dst),
            edge_type: rec.edge_type,
        });
    }
    Graph::from_parts(nodes, edges)
}

/// Writes `g` in the JSON-lines layout read by [`load_graph`].
pub fn write_graph<N: Write, E: Write>(g: &Graph, mut nodes: N, mut edges: E) -> std::io::Result<()> {
    for n in g.nodes() {
        let mut attrs = serde_json::Map::new();
        for (k, v) in &n.attributes {
            attrs.insert(k.clone(), v.clone().into());
        }
        let mut rec = serde_json::json!({"id": n.id, "type": n.node_type, "attributes": attrs});
        if let Some(label) = &n.label {
            rec["label"] = label.clone().into();
        }
        writeln!(nodes, "{rec}")?;
    }
    for e in g.edges() {
        writeln!(edges, "{}", serde_json::json!({"src": e.src, "dst": e.dst, "type": e.edge_type}))?;
    }
    nodes.flush()?;
    edges.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODES: &str = r#"{"id":"d1","type":"drug","attributes":{"name":"aspirin","note":"x"}}
{"id":"g1","type":"gene","attributes":{"name":"PTGS2"},"label":"enzyme"}

{"id":"g2","type":"gene"}
"#;

    #[test]
    fn loads_jsonl() {
        let edges = "{\"src\":\"d1\",\"dst\":\"g1\",\"type\":\"targets\"}\n";
        let g = load_graph(NODES.as_bytes(), edges.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        let d1 = g.node(&"d1".into()).unwrap();
        assert_eq!(d1.attributes[0], ("name".into(), "aspirin".into()));
        assert_eq!(d1.attributes[1].0, "note");
        assert_eq!(g.node(&"g1".into()).unwrap().label.as_deref(), Some("enzyme"));
    }

    #[test]
    fn write_then_load() {
        let edges = "{\"src\":\"d1\",\"dst\":\"g1\",\"type\":\"targets\"}\n";
        let g = load_graph(NODES.as_bytes(), edges.as_bytes()).unwrap();
        let (mut n, mut e) = (Vec::new(), Vec::new());
        write_graph(&g, &mut n, &mut e).unwrap();
        assert_eq!(load_graph(n.as_slice(), e.as_slice()).unwrap(), g);
    }

    #[test]
    fn empty_streams() {
        let g = load_graph("".as_bytes(), "".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn dangling_endpoint_names_edge() {
        let edges = "{\"src\":\"d1\",\"dst\":\"g1\",\"type\":\"t\"}\n{\"src\":\"d1\",\"dst\":\"z\",\"type\":\"t\"}\n";
        match load_graph(NODES.as_bytes(), edges.as_bytes()) {
            Err(GraphError::DanglingEdge { line, missing, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(missing.as_str(), "z");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_number() {
        let nodes = "{\"id\":\"a\",\"type\":\"t\"}\n{\"id\":\"b\",\n";
        match load_graph(nodes.as_bytes(), "".as_bytes()) {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_attribute_keys() {
        let nodes = "{\"id\":\"a\",\"type\":\"t\"}\n{\"id\":\"a\",\"type\":\"t\"}\n";
        assert!(matches!(
            load_graph(nodes.as_bytes(), "".as_bytes()),
            Err(GraphError::DuplicateNodeId(_))
        ));
        let nodes = "{\"id\":\"a\",\"type\":\"t\",\"attributes\":{\"k\":\"1\",\"k\":\"2\"}}\n";
        assert!(matches!(
            load_graph(nodes.as_bytes(), "".as_bytes()),
            Err(GraphError::Malformed { line: 1, .. })
        ));
    }
}
