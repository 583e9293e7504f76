use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::{EmbeddingVector, MemoryError, MemoryRecord, MemoryStore, Provenance};
use crate::encoder::EncodedSample;
use crate::retry::RetryPolicy;
use crate::rng::fnv1a;
use crate::sample::SampleId;
use crate::transport::{join_url, HttpTransport};

#[derive(Debug, Clone, Error)]
pub enum EmbedError {
    /// Worth retrying: transport failure, rate limiting, server error.
    #[error("transient embedding failure: {0}")]
    Transient(String),
    #[error("embedding endpoint rejected credentials: {0}")]
    Auth(String),
    #[error("invalid embedding response: {0}")]
    Invalid(String),
}

impl EmbedError {
    pub fn is_transient(&self) -> bool {
        matches!(self, Self::Transient(_))
    }
}

/// Text embedding provider: one vector per input text, in input order.
pub trait Embedder: Send + Sync {
    fn model(&self) -> &str;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError>;
}

/// Deterministic offline embedder: signed feature hashing of lowercase word
/// tokens into a fixed number of buckets.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
    calls: Arc<AtomicUsize>,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            calls: Arc::new(AtomicUsize::new(0)),
        }
    }

    /// Number of `embed` calls served so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim];
        let lower = text.to_lowercase();
        for token in lower
            .split(|c: char| !(c.is_alphanumeric() || c == '_'))
            .filter(|t| !t.is_empty())
        {
            let h = fnv1a(token.as_bytes());
            let bucket = (h % self.dim as u64) as usize;
            v[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        v
    }
}

impl Embedder for HashingEmbedder {
    fn model(&self) -> &str {
        "feature-hashing"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// JSON-over-HTTP embedding endpoint. Sends `{model, input: [texts]}` and
/// accepts either `{vectors: [[..]]}` or the `{data: [{embedding, index}]}`
/// shape.
pub struct RemoteEmbedder {
    url: String,
    model: String,
    token: Option<String>,
    transport: Arc<dyn HttpTransport>,
}

impl RemoteEmbedder {
    pub const DEFAULT_MODEL: &'static str = "text-embedding-ada-002";

    pub fn new(base_url: &str, path: &str, model: impl Into<String>, token: Option<String>, transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            url: join_url(base_url, path),
            model: model.into(),
            token,
            transport,
        }
    }
}

#[derive(Deserialize)]
struct VectorsBody {
    vectors: Option<Vec<Vec<f32>>>,
    data: Option<Vec<DataItem>>,
}

#[derive(Deserialize)]
struct DataItem {
    embedding: Vec<f32>,
    #[serde(default)]
    index: Option<usize>,
}

impl Embedder for RemoteEmbedder {
    fn model(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let body = json!({ "model": self.model, "input": texts });
        let resp = self
            .transport
            .post_json(&self.url, self.token.as_deref(), &body)
            .map_err(|e| EmbedError::Transient(e.to_string()))?;
        match resp.status {
            200..=299 => {}
            401 | 403 => return Err(EmbedError::Auth(resp.body)),
            408 | 429 | 500..=599 => return Err(EmbedError::Transient(format!("HTTP {}", resp.status))),
            s => return Err(EmbedError::Invalid(format!("HTTP {s}: {}", resp.body))),
        }
        let parsed: VectorsBody = serde_json::from_str(&resp.body).map_err(|e| EmbedError::Invalid(e.to_string()))?;
        let vectors = match (parsed.vectors, parsed.data) {
            (Some(v), _) => v,
            (None, Some(mut items)) => {
                items.sort_by_key(|d| d.index.unwrap_or(0));
                items.into_iter().map(|d| d.embedding).collect()
            }
            (None, None) => return Err(EmbedError::Invalid("response has neither `vectors` nor `data`".into())),
        };
        if vectors.len() != texts.len() {
            return Err(EmbedError::Invalid(format!("{} vectors for {} inputs", vectors.len(), texts.len())));
        }
        Ok(vectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemorizeOptions {
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
}

impl Default for MemorizeOptions {
    fn default() -> Self {
        Self {
            batch_size: 16,
            max_in_flight: 8,
            retry: RetryPolicy::default(),
        }
    }
}

/// Embeds every sample's text and stores it with its label. Batches are
/// sent by up to `max_in_flight` workers; records keep input order. Any
/// batch that still fails after retries aborts the whole build.
pub fn memorize(
    samples: &[EncodedSample],
    labels: &HashMap<SampleId, String>,
    embedder: &dyn Embedder,
    opts: &MemorizeOptions,
) -> Result<MemoryStore, MemoryError> {
    if samples.is_empty() {
        return Err(MemoryError::NoSamples);
    }
    let mut seen = HashSet::with_capacity(samples.len());
    for s in samples {
        if !seen.insert(&s.sample_id) {
            return Err(MemoryError::DuplicateSample(s.sample_id.clone()));
        }
        match labels.get(&s.sample_id) {
            Some(l) if !l.is_empty() => {}
            Some(_) => return Err(MemoryError::EmptyLabel(s.sample_id.clone())),
            None => return Err(MemoryError::MissingLabel(s.sample_id.clone())),
        }
    }

    let batch_size = opts.batch_size.max(1);
    let batches: Vec<&[EncodedSample]> = samples.chunks(batch_size).collect();
    let results: Mutex<Vec<Option<Vec<Vec<f32>>>>> = Mutex::new(vec![None; batches.len()]);
    let failure: Mutex<Option<MemoryError>> = Mutex::new(None);
    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.max(1).min(batches.len());

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(batch) = batches.get(i) else { return };
                let texts: Vec<String> = batch.iter().map(|s| s.text.clone()).collect();
                let outcome = opts
                    .retry
                    .run(EmbedError::is_transient, || embedder.embed(&texts))
                    .map_err(|(e, attempts)| MemoryError::Provider {
                        attempts,
                        message: e.to_string(),
                    })
                    .and_then(|v| {
                        if v.len() == texts.len() {
                            Ok(v)
                        } else {
                            Err(MemoryError::Provider {
                                attempts: 1,
                                message: format!("{} vectors for {} inputs", v.len(), texts.len()),
                            })
                        }
                    });
                match outcome {
                    Ok(v) => results.lock().unwrap()[i] = Some(v),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let vectors: Vec<Vec<f32>> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .flat_map(|b| b.expect("every batch completed"))
        .collect();

    let dim = vectors[0].len();
    let mut store = MemoryStore::new(dim, Provenance::LmEmbedding);
    for (sample, values) in samples.iter().zip(vectors) {
        store.insert(MemoryRecord {
            sample_id: sample.sample_id.clone(),
            kind: sample.kind,
            vector: EmbeddingVector::new(values)?,
            label: labels[&sample.sample_id].clone(),
            encoded_text: sample.text.clone(),
        })?;
    }
    Ok(store)
}
