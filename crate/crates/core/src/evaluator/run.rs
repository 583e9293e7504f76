use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{metrics_from_traces, RunReport, SplitSummary, Timing, REPORT_SCHEMA_VERSION};
use super::EvalError;
use crate::encoder::{Encoder, EncoderConfig, LabelVisibility};
use crate::graph::{sample_negative_edges, split_dataset, DegreeStats, Graph, NodeId, Split, SplitRatios};
use crate::llm::ChatBackend;
use crate::memory::{memorize, MemorizeOptions, MemoryStore, Provenance};
use crate::reasoner::{
    validate_options, Agent, ExamplePolicy, LlmSettings, Method, QuerySource, ReasoningTrace, TaskKind, TaskSpec,
    NEGATIVE, POSITIVE,
};
use crate::rng::derive_seed;
use crate::sample::SampleId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskDefinition {
    NodeClassification {
        /// Restrict targets to one node type; all labelled nodes otherwise.
        #[serde(default)]
        node_type: Option<String>,
    },
    LinkPrediction { src_type: String, dst_type: String },
}

/// Everything about a run except the data and the backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub seed: u64,
    pub method: Method,
    pub workers: usize,
    pub encoder: EncoderConfig,
    pub policy: ExamplePolicy,
    pub llm: LlmSettings,
    pub memorize: MemorizeOptions,
    pub record_wall_time: bool,
    pub reasons_cache: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            method: Method::GraphAgent,
            workers: 4,
            encoder: EncoderConfig::default(),
            policy: ExamplePolicy::default(),
            llm: LlmSettings::default(),
            memorize: MemorizeOptions::default(),
            record_wall_time: false,
            reasons_cache: false,
        }
    }
}

/// Labelled samples partitioned into train / validation / test.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTask {
    pub kind: TaskKind,
    pub split: Split<SampleId>,
    pub labels: HashMap<SampleId, String>,
    /// Sorted class labels (node tasks only).
    pub options: Vec<String>,
    pub positives: usize,
    pub negatives: usize,
}

impl PreparedTask {
    pub fn task_spec(&self, settings: &EvalSettings) -> TaskSpec {
        TaskSpec {
            kind: self.kind,
            options: self.options.clone(),
            policy: settings.policy,
            encoder: settings.encoder.clone(),
        }
    }

    fn labelled(&self, ids: &[SampleId]) -> Vec<(SampleId, Option<String>)> {
        ids.iter().map(|id| (id.clone(), self.labels.get(id).cloned())).collect()
    }
}

/// Node tasks split labelled nodes 60/20/20. Link tasks collect positive
/// edges between the two types, add as many sampled non-edges, then split
/// the merged set 80/10/10.
pub fn prepare_task(g: &Graph, def: &TaskDefinition, seed: u64) -> Result<PreparedTask, EvalError> {
    match def {
        TaskDefinition::NodeClassification { node_type } => {
            let ids: Vec<SampleId> = g
                .nodes()
                .iter()
                .filter(|n| n.label.is_some() && node_type.as_ref().map_or(true, |t| &n.node_type == t))
                .map(|n| SampleId::Node(n.id.clone()))
                .collect();
            if ids.is_empty() {
                return Err(EvalError::NoLabelledNodes(node_type.clone()));
            }
            let labels: HashMap<SampleId, String> = ids
                .iter()
                .map(|id| {
                    let n = g.node(id.endpoints()[0]).and_then(|n| n.label.clone()).unwrap_or_default();
                    (id.clone(), n)
                })
                .collect();
            let options: Vec<String> = labels.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
            validate_options(&options)?;
            let split = split_dataset(&ids, SplitRatios::NODE_CLASSIFICATION, seed)?;
            Ok(PreparedTask {
                kind: TaskKind::NodeClassification,
                split,
                labels,
                options,
                positives: 0,
                negatives: 0,
            })
        }
        TaskDefinition::LinkPrediction { src_type, dst_type } => {
            let positives = positive_pairs(g, src_type, dst_type);
            if positives.is_empty() {
                return Err(EvalError::NoPositiveEdges {
                    src_type: src_type.clone(),
                    dst_type: dst_type.clone(),
                });
            }
            let negatives = sample_negative_edges(g, src_type, dst_type, positives.len(), derive_seed(seed, "negatives"))?;
            let mut labels = HashMap::new();
            let mut ids = Vec::with_capacity(positives.len() * 2);
            for (a, b) in &positives {
                let id = SampleId::Edge(a.clone(), b.clone());
                labels.insert(id.clone(), POSITIVE.to_string());
                ids.push(id);
            }
            for e in &negatives {
                let id = SampleId::Edge(e.src.clone(), e.dst.clone());
                labels.insert(id.clone(), NEGATIVE.to_string());
                ids.push(id);
            }
            let split = split_dataset(&ids, SplitRatios::LINK_PREDICTION, seed)?;
            Ok(PreparedTask {
                kind: TaskKind::LinkPrediction,
                split,
                labels,
                options: Vec::new(),
                positives: positives.len(),
                negatives: negatives.len(),
            })
        }
    }
}

/// Distinct node pairs joined by an edge, oriented `(src_type, dst_type)`.
fn positive_pairs(g: &Graph, src_type: &str, dst_type: &str) -> Vec<(NodeId, NodeId)> {
    let type_of = |id: &NodeId| g.node(id).map(|n| n.node_type.as_str());
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in g.edges() {
        if e.src == e.dst {
            continue;
        }
        let pair = if type_of(&e.src) == Some(src_type) && type_of(&e.dst) == Some(dst_type) {
            (e.src.clone(), e.dst.clone())
        } else if type_of(&e.dst) == Some(src_type) && type_of(&e.src) == Some(dst_type) {
            (e.dst.clone(), e.src.clone())
        } else {
            continue;
        };
        let key = if pair.0 <= pair.1 {
            pair.clone()
        } else {
            (pair.1.clone(), pair.0.clone())
        };
        if seen.insert(key) {
            out.push(pair);
        }
    }
    out
}

/// Encoder for a prepared task. Node tasks only reveal training labels on
/// neighbour lines.
pub fn task_encoder<'g>(g: &'g Graph, stats: &'g DegreeStats, prepared: &PreparedTask, cfg: &EncoderConfig) -> Encoder<'g> {
    let visibility = match prepared.kind {
        TaskKind::NodeClassification => LabelVisibility::Only(
            prepared
                .split
                .train
                .iter()
                .flat_map(|id| id.endpoints().into_iter().cloned())
                .collect(),
        ),
        TaskKind::LinkPrediction => LabelVisibility::All,
    };
    Encoder::new(g, stats, cfg.clone()).with_visibility(visibility)
}

fn provenance_of(query: &QuerySource<'_>) -> Provenance {
    match query {
        QuerySource::Lm(_) => Provenance::LmEmbedding,
        QuerySource::Gnn(_) => Provenance::GnnEmbedding,
    }
}

/// Encodes and embeds the training split.
pub fn build_memory(
    g: &Graph,
    stats: &DegreeStats,
    prepared: &PreparedTask,
    settings: &EvalSettings,
    source: QuerySource<'_>,
) -> Result<MemoryStore, EvalError> {
    if prepared.split.train.is_empty() {
        return Err(EvalError::EmptySplit("train"));
    }
    let encoder = task_encoder(g, stats, prepared, &settings.encoder);
    let samples = prepared
        .split
        .train
        .iter()
        .map(|id| encoder.encode(id, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let store = match source {
        QuerySource::Lm(embedder) => memorize(&samples, &prepared.labels, embedder, &settings.memorize)?,
        QuerySource::Gnn(gnn) => gnn.build_store(&samples, &prepared.labels)?,
    };
    Ok(store)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// In test-split order.
    pub traces: Vec<ReasoningTrace>,
}

/// Predicts every test sample against `store` and scores the results.
pub fn evaluate(
    g: &Graph,
    stats: &DegreeStats,
    prepared: &PreparedTask,
    store: &MemoryStore,
    settings: &EvalSettings,
    query: QuerySource<'_>,
    backend: &dyn ChatBackend,
) -> Result<RunOutput, EvalError> {
    if prepared.split.test.is_empty() {
        return Err(EvalError::EmptySplit("test"));
    }
    if store.provenance() != provenance_of(&query) {
        return Err(EvalError::ProvenanceMismatch {
            store: store.provenance(),
            query: provenance_of(&query),
        });
    }
    let encoder = task_encoder(g, stats, prepared, &settings.encoder);
    let agent = Agent::new(encoder, store, query, backend, prepared.task_spec(settings))
        .with_llm(settings.llm.clone())
        .with_seed(settings.seed)
        .with_method(settings.method)
        .with_wall_time(settings.record_wall_time)
        .with_reasons_cache(settings.reasons_cache);

    let start = Instant::now();
    let targets = prepared.labelled(&prepared.split.test);
    let traces = agent.predict_all(&targets, settings.workers);
    let predict_ms = start.elapsed().as_millis() as u64;

    let metrics = metrics_from_traces(prepared.kind, &traces)?;
    let mut flags = std::collections::BTreeMap::new();
    for t in &traces {
        for f in &t.flags {
            *flags.entry(f.clone()).or_insert(0u64) += 1;
        }
    }
    let (train, validation, test) = prepared.split.sizes();
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        task: prepared.kind,
        method: settings.method,
        config: serde_json::to_value(settings).unwrap_or(serde_json::Value::Null),
        split: SplitSummary {
            seed: prepared.split.seed,
            train,
            validation,
            test,
            positives: prepared.positives,
            negatives: prepared.negatives,
        },
        metrics,
        failed_samples: traces.iter().filter(|t| t.error.is_some()).count() as u64,
        flags,
        trace_file: None,
        timing: Timing {
            memorize_ms: None,
            predict_ms,
        },
    };
    Ok(RunOutput { report, traces })
}

fn run_task(
    g: &Graph,
    def: &TaskDefinition,
    settings: &EvalSettings,
    query: QuerySource<'_>,
    backend: &dyn ChatBackend,
) -> Result<RunOutput, EvalError> {
    let stats = crate::graph::degree_stats(g);
    let prepared = prepare_task(g, def, settings.seed)?;
    let start = Instant::now();
    let store = build_memory(g, &stats, &prepared, settings, query)?;
    let memorize_ms = start.elapsed().as_millis() as u64;
    let mut out = evaluate(g, &stats, &prepared, &store, settings, query, backend)?;
    out.report.timing.memorize_ms = Some(memorize_ms);
    Ok(out)
}

pub fn run_node_classification(
    g: &Graph,
    node_type: Option<&str>,
    settings: &EvalSettings,
    query: QuerySource<'_>,
    backend: &dyn ChatBackend,
) -> Result<RunOutput, EvalError> {
    let def = TaskDefinition::NodeClassification {
        node_type: node_type.map(str::to_string),
    };
    run_task(g, &def, settings, query, backend)
}

pub fn run_link_prediction(
    g: &Graph,
    src_type: &str,
    dst_type: &str,
    settings: &EvalSettings,
    query: QuerySource<'_>,
    backend: &dyn ChatBackend,
) -> Result<RunOutput, EvalError> {
    let def = TaskDefinition::LinkPrediction {
        src_type: src_type.to_string(),
        dst_type: dst_type.to_string(),
    };
    run_task(g, &def, settings, query, backend)
}
