//! Long-term memory: embedded training samples with exact cosine retrieval.

mod embed;
mod gnn;
mod persist;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;
use crate::sample::{SampleId, SampleKind};

pub use embed::{memorize, Embedder, EmbedError, HashingEmbedder, MemorizeOptions, RemoteEmbedder};
pub use gnn::{import_gnn_embeddings, GnnEmbeddings};
pub use persist::{SIDECAR_FILE, VECTORS_FILE};

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("embedding must have at least one component")]
    EmptyVector,
    #[error("duplicate sample `{0}`")]
    DuplicateSample(SampleId),
    #[error("no label for sample `{0}`")]
    MissingLabel(SampleId),
    #[error("record `{0}` has an empty label")]
    EmptyLabel(SampleId),
    #[error("nothing to memorize")]
    NoSamples,
    #[error("retrieval k must be at least 1")]
    InvalidK,
    #[error("embedding provider failed after {attempts} attempt(s): {message}")]
    Provider { attempts: u32, message: String },
    #[error("no vector for node `{0}`")]
    MissingNodeVector(NodeId),
    #[error("line {line}: vector has dimension {got}, expected {expected}")]
    InconsistentDim { line: usize, expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("store format: {0}")]
    Format(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn l2_norm(values: &[f32]) -> f64 {
    values.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
}

/// Finite embedding with its Euclidean norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f32>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, MemoryError> {
        if values.is_empty() {
            return Err(MemoryError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MemoryError::NonFinite);
        }
        let norm = l2_norm(&values);
        Ok(Self { values, norm })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `[self ‖ other]`.
    pub fn concat(&self, other: &EmbeddingVector) -> EmbeddingVector {
        let mut values = Vec::with_capacity(self.dim() + other.dim());
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        let norm = l2_norm(&values);
        EmbeddingVector { values, norm }
    }
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MemoryError> {
    if a.dim() != b.dim() {
        return Err(MemoryError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.norm == 0.0 || b.norm == 0.0 {
        return Err(MemoryError::ZeroVector);
    }
    let dot: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum();
    // `+ 0.0` folds -0.0 into 0.0 so orthogonal hits tie under total_cmp.
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0) + 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    LmEmbedding,
    GnnEmbedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRecord {
    pub sample_id: SampleId,
    pub kind: SampleKind,
    pub vector: EmbeddingVector,
    pub label: String,
    pub encoded_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStore {
    dim: usize,
    provenance: Provenance,
    records: Vec<MemoryRecord>,
    ids: HashMap<SampleId, usize>,
}

impl MemoryStore {
    pub fn new(dim: usize, provenance: Provenance) -> Self {
        Self {
            dim,
            provenance,
            records: Vec::new(),
            ids: HashMap::new(),
        }
    }

    pub fn insert(&mut self, record: MemoryRecord) -> Result<(), MemoryError> {
        if record.vector.dim() != self.dim {
            return Err(MemoryError::DimensionMismatch {
                expected: self.dim,
                got: record.vector.dim(),
            });
        }
        if record.vector.norm() == 0.0 {
            return Err(MemoryError::ZeroVector);
        }
        if record.label.is_empty() {
            return Err(MemoryError::EmptyLabel(record.sample_id));
        }
        if self.ids.contains_key(&record.sample_id) {
            return Err(MemoryError::DuplicateSample(record.sample_id));
        }
        self.ids.insert(record.sample_id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn records(&self) -> &[MemoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &SampleId) -> Option<&MemoryRecord> {
        self.ids.get(id).map(|&i| &self.records[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'s> {
    pub record: &'s MemoryRecord,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval<'s> {
    pub hits: Vec<Hit<'s>>,
    /// Fewer than `k` records passed the filter.
    pub short: bool,
}

/// Exact top-`k` by cosine similarity among records passing `filter`,
/// descending, ties broken by ascending sample id.
pub fn retrieve_similar<'s>(
    store: &'s MemoryStore,
    query: &EmbeddingVector,
    k: usize,
    filter: impl Fn(&MemoryRecord) -> bool,
) -> Result<Retrieval<'s>, MemoryError> {
    if k == 0 {
        return Err(MemoryError::InvalidK);
    }
    if query.dim() != store.dim {
        return Err(MemoryError::DimensionMismatch {
            expected: store.dim,
            got: query.dim(),
        });
    }
    let mut hits = Vec::new();
    for record in store.records.iter().filter(|r| filter(r)) {
        hits.push(Hit {
            record,
            similarity: cosine_similarity(query, &record.vector)?,
        });
    }
    hits.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.record.sample_id.cmp(&b.record.sample_id))
    });
    let short = hits.len() < k;
    hits.truncate(k);
    Ok(Retrieval { hits, short })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    fn rec(id: &str, xs: &[f32], label: &str) -> MemoryRecord {
        MemoryRecord {
            sample_id: SampleId::node(id),
            kind: SampleKind::Node,
            vector: v(xs),
            label: label.into(),
            encoded_text: format!("node: {id}"),
        }
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&v(&[3.0, 4.0]), &v(&[3.0, 4.0])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert!((cosine_similarity(&v(&[1.0, 2.0]), &v(&[2.0, 1.0])).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(
            cosine_similarity(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(MemoryError::DimensionMismatch { .. })
        ));
        assert!(matches!(cosine_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(MemoryError::ZeroVector)));
        assert!(EmbeddingVector::new(vec![f32::NAN]).is_err());
    }

    #[test]
    fn retrieval_example() {
        let mut store = MemoryStore::new(2, Provenance::LmEmbedding);
        store.insert(rec("A", &[1.0, 0.0], "x")).unwrap();
        store.insert(rec("B", &[0.0, 1.0], "y")).unwrap();
        store.insert(rec("C", &[0.6, 0.8], "y")).unwrap();
        let r = retrieve_similar(&store, &v(&[0.0, 1.0]), 2, |_| true).unwrap();
        let got: Vec<(String, f64)> = r.hits.iter().map(|h| (h.record.sample_id.to_string(), h.similarity)).collect();
        assert_eq!(got[0].0, "B");
        assert!((got[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(got[1].0, "C");
        assert!((got[1].1 - 0.8).abs() < 1e-6);
        assert!(!r.short);

        let filtered = retrieve_similar(&store, &v(&[0.0, 1.0]), 3, |r| r.label == "x").unwrap();
        assert_eq!(filtered.hits.len(), 1);
        assert!(filtered.short);
        assert!(matches!(retrieve_similar(&store, &v(&[1.0]), 1, |_| true), Err(MemoryError::DimensionMismatch { .. })));
        assert!(matches!(retrieve_similar(&store, &v(&[1.0, 0.0]), 0, |_| true), Err(MemoryError::InvalidK)));
    }

    #[test]
    fn store_invariants() {
        let mut store = MemoryStore::new(2, Provenance::LmEmbedding);
        store.insert(rec("A", &[1.0, 0.0], "x")).unwrap();
        assert!(matches!(store.insert(rec("A", &[0.0, 1.0], "x")), Err(MemoryError::DuplicateSample(_))));
        assert!(matches!(store.insert(rec("B", &[1.0], "x")), Err(MemoryError::DimensionMismatch { .. })));
        assert!(matches!(store.insert(rec("C", &[1.0, 0.0], "")), Err(MemoryError::EmptyLabel(_))));
        assert!(matches!(store.insert(rec("D", &[0.0, 0.0], "x")), Err(MemoryError::ZeroVector)));
        assert_eq!(store.len(), 1);
        assert!(store.get(&SampleId::node("A")).is_some());
    }

    #[test]
    fn concat_norm() {
        let c = v(&[1.0, 0.0]).concat(&v(&[0.0, 1.0]));
        assert_eq!(c.values(), &[1.0, 0.0, 0.0, 1.0]);
        assert!((c.norm() - 2f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in proptest::collection::vec(-10.0f32..10.0, 4),
            b in proptest::collection::vec(-10.0f32..10.0, 4),
            c in 0.5f32..4.0,
        ) {
            let va = v(&a);
            let vb = v(&b);
            prop_assume!(va.norm() > 1e-3 && vb.norm() > 1e-3);
            let ab = cosine_similarity(&va, &vb).unwrap();
            prop_assert_eq!(ab, cosine_similarity(&vb, &va).unwrap());
            let scaled = v(&a.iter().map(|x| x * c).collect::<Vec<_>>());
            prop_assert!((cosine_similarity(&scaled, &vb).unwrap() - ab).abs() < 1e-5);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
