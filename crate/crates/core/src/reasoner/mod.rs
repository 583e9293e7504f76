//! Inductive-deductive reasoning over retrieved examples, plus the
//! simple-ask and fixed k-shot chain-of-thought baselines.

mod agent;
mod parse;
mod prompt;
mod select;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{EncodedSample, EncoderConfig};
use crate::graph::GraphError;
use crate::llm::LlmError;
use crate::memory::MemoryError;
use crate::sample::SampleId;

pub use agent::{induce_reasons, Agent, LlmSettings, QuerySource};
pub use parse::{parse_link_answer, parse_node_answer, validate_options};
pub use prompt::{
    build_cot_prompt, build_deductive_prompt, build_inductive_prompt, build_simple_prompt, inductive_instruction,
    link_question, node_question, render_examples, LINK_INSTRUCTION, NODE_INSTRUCTION,
};
pub use select::{choose_fixed_examples, select_examples, Pick, Selection};

pub const POSITIVE: &str = "positive";
pub const NEGATIVE: &str = "negative";
pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    NodeClassification,
    LinkPrediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExamplePolicy {
    /// Similar examples retrieved for a node target.
    pub node_examples: usize,
    /// Most similar positive edges for a link target.
    pub positives: usize,
    /// Randomly chosen negative edges for a link target.
    pub negatives: usize,
}

impl Default for ExamplePolicy {
    fn default() -> Self {
        Self {
            node_examples: 5,
            positives: 3,
            negatives: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Class labels offered for node targets.
    pub options: Vec<String>,
    pub policy: ExamplePolicy,
    pub encoder: EncoderConfig,
}

impl TaskSpec {
    pub fn node_classification(options: Vec<String>, encoder: EncoderConfig) -> Result<Self, ReasonerError> {
        validate_options(&options)?;
        Ok(Self {
            kind: TaskKind::NodeClassification,
            options,
            policy: ExamplePolicy::default(),
            encoder,
        })
    }

    pub fn link_prediction(encoder: EncoderConfig) -> Self {
        Self {
            kind: TaskKind::LinkPrediction,
            options: Vec::new(),
            policy: ExamplePolicy::default(),
            encoder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub sample: EncodedSample,
    /// Memory label: a class, or `positive` / `negative`.
    pub label: String,
    pub similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExampleSet {
    pub examples: Vec<Example>,
    pub positives: usize,
    pub negatives: usize,
    /// The policy asked for more examples than were available.
    pub shortfall: bool,
}

impl ExampleSet {
    pub fn ids(&self) -> Vec<&SampleId> {
        self.examples.iter().map(|e| &e.sample.sample_id).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Label(String),
    Link(bool),
}

impl Answer {
    /// Whether the answer agrees with a memory-style truth label.
    pub fn matches(&self, truth: &str) -> bool {
        match self {
            Self::Label(l) => l == truth,
            Self::Link(b) => *b == (truth == POSITIVE),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    GraphAgent,
    SimpleAsk,
    KShotCot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceError {
    pub stage: String,
    pub message: String,
}

/// Everything that went into and came out of one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub schema_version: u32,
    pub method: Method,
    pub target: SampleId,
    pub truth: Option<String>,
    pub target_text: Option<String>,
    pub example_set: ExampleSet,
    pub inductive_prompt: Option<String>,
    pub induced_reasons: Option<String>,
    pub deductive_prompt: Option<String>,
    pub deductive_response: Option<String>,
    pub parsed_answer: Option<Answer>,
    /// Non-fatal conditions, e.g. `empty-reasons`, `fewer-examples`, `top-k-halved`.
    pub flags: Vec<String>,
    pub error: Option<TraceError>,
    /// Omitted unless timing capture is enabled; traces are otherwise
    /// byte-reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl ReasoningTrace {
    pub fn new(method: Method, target: SampleId, truth: Option<String>) -> Self {
        Self {
            schema_version: TRACE_SCHEMA_VERSION,
            method,
            target,
            truth,
            target_text: None,
            example_set: ExampleSet::default(),
            inductive_prompt: None,
            induced_reasons: None,
            deductive_prompt: None,
            deductive_response: None,
            parsed_answer: None,
            flags: Vec::new(),
            error: None,
            wall_time_ms: None,
        }
    }

    pub fn is_correct(&self) -> bool {
        match (&self.parsed_answer, &self.truth) {
            (Some(a), Some(t)) => a.matches(t),
            _ => false,
        }
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }
}

#[derive(Debug, Error)]
pub enum ReasonerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("embedding the target failed: {0}")]
    Embed(String),
    #[error("memory store is empty")]
    EmptyStore,
    #[error("no option found in response")]
    Unparseable,
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
