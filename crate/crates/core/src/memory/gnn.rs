use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::{EmbeddingVector, MemoryError, MemoryRecord, MemoryStore, Provenance};
use crate::encoder::EncodedSample;
use crate::graph::NodeId;
use crate::sample::SampleId;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorLine {
    id: String,
    vector: Vec<f32>,
}

/// Externally trained node embeddings. Edge vectors are the concatenation
/// `[vec(src) ‖ vec(dst)]`, so edge stores have twice the node dimension.
#[derive(Debug, Clone, Default)]
pub struct GnnEmbeddings {
    dim: usize,
    vectors: HashMap<NodeId, EmbeddingVector>,
}

impl GnnEmbeddings {
    /// Reads JSON lines of `{"id": .., "vector": [..]}`.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, MemoryError> {
        let mut out = GnnEmbeddings::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|source| MemoryError::Io {
                path: "gnn vectors".into(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: VectorLine = serde_json::from_str(&line).map_err(|e| MemoryError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if out.vectors.is_empty() {
                out.dim = rec.vector.len();
            } else if rec.vector.len() != out.dim {
                return Err(MemoryError::InconsistentDim {
                    line: line_no,
                    expected: out.dim,
                    got: rec.vector.len(),
                });
            }
            let vector = EmbeddingVector::new(rec.vector).map_err(|e| MemoryError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if out.vectors.insert(NodeId::new(rec.id.clone()), vector).is_some() {
                return Err(MemoryError::Malformed {
                    line: line_no,
                    message: format!("duplicate node `{}`", rec.id),
                });
            }
        }
        Ok(out)
    }

    pub fn from_vectors(vectors: impl IntoIterator<Item = (NodeId, Vec<f32>)>) -> Result<Self, MemoryError> {
        let mut out = GnnEmbeddings::default();
        for (i, (id, values)) in vectors.into_iter().enumerate() {
            if out.vectors.is_empty() {
                out.dim = values.len();
            } else if values.len() != out.dim {
                return Err(MemoryError::InconsistentDim {
                    line: i + 1,
                    expected: out.dim,
                    got: values.len(),
                });
            }
            out.vectors.insert(id, EmbeddingVector::new(values)?);
        }
        Ok(out)
    }

    /// Writes the vectors as JSON lines, sorted by node id.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut ids: Vec<&NodeId> = self.vectors.keys().collect();
        ids.sort();
        for id in ids {
            let line = serde_json::json!({"id": id, "vector": self.vectors[id].values()});
            writeln!(w, "{line}")?;
        }
        w.flush()
    }

    pub fn node_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn node_vector(&self, id: &NodeId) -> Result<&EmbeddingVector, MemoryError> {
        self.vectors.get(id).ok_or_else(|| MemoryError::MissingNodeVector(id.clone()))
    }

    pub fn vector_for(&self, sample: &SampleId) -> Result<EmbeddingVector, MemoryError> {
        match sample {
            SampleId::Node(n) => self.node_vector(n).cloned(),
            SampleId::Edge(a, b) => Ok(self.node_vector(a)?.concat(self.node_vector(b)?)),
        }
    }

    /// Builds a retrieval store from these vectors for the given samples.
    pub fn build_store(&self, samples: &[EncodedSample], labels: &HashMap<SampleId, String>) -> Result<MemoryStore, MemoryError> {
        let first = samples.first().ok_or(MemoryError::NoSamples)?;
        let dim = match first.sample_id {
            SampleId::Node(_) => self.dim,
            SampleId::Edge(..) => self.dim * 2,
        };
        let mut store = MemoryStore::new(dim, Provenance::GnnEmbedding);
        for s in samples {
            let label = labels.get(&s.sample_id).ok_or_else(|| MemoryError::MissingLabel(s.sample_id.clone()))?;
            store.insert(MemoryRecord {
                sample_id: s.sample_id.clone(),
                kind: s.kind,
                vector: self.vector_for(&s.sample_id)?,
                label: label.clone(),
                encoded_text: s.text.clone(),
            })?;
        }
        Ok(store)
    }
}

/// Reads a node-vector stream and builds a GNN-provenance store for `samples`.
pub fn import_gnn_embeddings<R: BufRead>(
    node_vectors: R,
    samples: &[EncodedSample],
    labels: &HashMap<SampleId, String>,
) -> Result<MemoryStore, MemoryError> {
    GnnEmbeddings::from_jsonl(node_vectors)?.build_store(samples, labels)
}
