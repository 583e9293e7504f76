use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::parse::{parse_link_answer, parse_node_answer};
use super::prompt::{
    build_cot_prompt, build_deductive_prompt, build_inductive_prompt, build_simple_prompt, link_question, node_question,
};
use super::select::{choose_fixed_examples, select_examples, Selection};
use super::{Answer, Example, ExampleSet, Method, ReasonerError, ReasoningTrace, TaskKind, TaskSpec, TraceError};
use crate::encoder::Encoder;
use crate::graph::NodeId;
use crate::llm::{complete, request_key, ChatBackend, ChatRequest, LlmError, DEFAULT_CHAT_MODEL, SYSTEM_PROMPT};
use crate::memory::{EmbeddingVector, Embedder, GnnEmbeddings, MemoryStore};
use crate::sample::SampleId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            model_name: DEFAULT_CHAT_MODEL.to_string(),
            temperature: 0.0,
            max_output_tokens: 1024,
        }
    }
}

impl LlmSettings {
    pub fn request(&self, user_text: impl Into<String>) -> ChatRequest {
        ChatRequest {
            system_text: SYSTEM_PROMPT.to_string(),
            user_text: user_text.into(),
            temperature: self.temperature,
            max_output_tokens: self.max_output_tokens,
            model_name: self.model_name.clone(),
        }
    }
}

/// Where target query vectors come from; must match the store's provenance.
#[derive(Clone, Copy)]
pub enum QuerySource<'a> {
    Lm(&'a dyn Embedder),
    Gnn(&'a GnnEmbeddings),
}

impl QuerySource<'_> {
    fn vector(&self, target: &SampleId, text: &str) -> Result<EmbeddingVector, ReasonerError> {
        match self {
            Self::Lm(e) => {
                let mut out = e.embed(&[text.to_string()]).map_err(|e| ReasonerError::Embed(e.to_string()))?;
                let v = out.pop().ok_or_else(|| ReasonerError::Embed("provider returned no vector".into()))?;
                Ok(EmbeddingVector::new(v)?)
            }
            Self::Gnn(g) => Ok(g.vector_for(target)?),
        }
    }
}

/// Sends the inductive prompt and returns the raw reasons text.
pub fn induce_reasons(backend: &dyn ChatBackend, settings: &LlmSettings, prompt: &str) -> Result<String, ReasonerError> {
    Ok(complete(backend, &settings.request(prompt))?.text)
}

type StageResult<T> = Result<T, (&'static str, ReasonerError)>;

fn at<T, E: Into<ReasonerError>>(stage: &'static str, r: Result<T, E>) -> StageResult<T> {
    r.map_err(|e| (stage, e.into()))
}

/// Per-target prediction pipeline over a built memory.
pub struct Agent<'a> {
    encoder: Encoder<'a>,
    store: &'a MemoryStore,
    query: QuerySource<'a>,
    backend: &'a dyn ChatBackend,
    task: TaskSpec,
    llm: LlmSettings,
    method: Method,
    seed: u64,
    fixed: Option<Selection>,
    record_wall_time: bool,
    reasons_cache: Option<Mutex<HashMap<String, String>>>,
}

impl<'a> Agent<'a> {
    pub fn new(
        encoder: Encoder<'a>,
        store: &'a MemoryStore,
        query: QuerySource<'a>,
        backend: &'a dyn ChatBackend,
        task: TaskSpec,
    ) -> Self {
        Self {
            encoder,
            store,
            query,
            backend,
            task,
            llm: LlmSettings::default(),
            method: Method::GraphAgent,
            seed: 0,
            fixed: None,
            record_wall_time: false,
            reasons_cache: None,
        }
    }

    pub fn with_llm(mut self, llm: LlmSettings) -> Self {
        self.llm = llm;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.refresh_fixed();
        self
    }

    /// Switches to a baseline. The k-shot set is drawn once, here.
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self.refresh_fixed();
        self
    }

    pub fn with_wall_time(mut self, on: bool) -> Self {
        self.record_wall_time = on;
        self
    }

    /// Reuse induced reasons for targets whose inductive request is identical.
    pub fn with_reasons_cache(mut self, on: bool) -> Self {
        self.reasons_cache = on.then(|| Mutex::new(HashMap::new()));
        self
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn fixed_examples(&self) -> Option<Vec<&SampleId>> {
        self.fixed.as_ref().map(|s| s.picks.iter().map(|p| &p.sample_id).collect())
    }

    fn refresh_fixed(&mut self) {
        self.fixed = (self.method == Method::KShotCot)
            .then(|| choose_fixed_examples(self.store, self.task.kind, &self.task.policy, self.seed));
    }

    fn question(&self, target: &SampleId) -> String {
        match target {
            SampleId::Node(n) => node_question(n, &self.task.options),
            SampleId::Edge(a, b) => link_question(a, b),
        }
    }

    /// Runs the configured method for one target. Failures are recorded in
    /// the trace, never raised.
    pub fn predict(&self, target: &SampleId, truth: Option<&str>) -> ReasoningTrace {
        let start = Instant::now();
        let mut trace = ReasoningTrace::new(self.method, target.clone(), truth.map(str::to_string));
        let mut outcome = self.run(&self.encoder, target, &mut trace);
        if let Err((_, ReasonerError::Llm(LlmError::ContextOverflow(_)))) = &outcome {
            let top_k = (self.encoder.config().top_k / 2).max(1);
            trace = ReasoningTrace::new(self.method, target.clone(), truth.map(str::to_string));
            trace.flag("top-k-halved");
            outcome = self.run(&self.encoder.with_top_k(top_k), target, &mut trace);
        }
        if let Err((stage, e)) = outcome {
            log::warn!("{target}: {stage} failed: {e}");
            trace.error = Some(TraceError {
                stage: stage.to_string(),
                message: e.to_string(),
            });
        }
        if self.record_wall_time {
            trace.wall_time_ms = Some(start.elapsed().as_millis() as u64);
        }
        trace
    }

    /// Predicts every target with up to `workers` threads; traces come back
    /// in input order.
    pub fn predict_all(&self, targets: &[(SampleId, Option<String>)], workers: usize) -> Vec<ReasoningTrace> {
        let slots: Vec<Mutex<Option<ReasoningTrace>>> = targets.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        thread::scope(|scope| {
            for _ in 0..workers.max(1).min(targets.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some((id, truth)) = targets.get(i) else { return };
                    let t = self.predict(id, truth.as_deref());
                    *slots[i].lock().unwrap() = Some(t);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("every target is predicted"))
            .collect()
    }

    fn run(&self, encoder: &Encoder<'_>, target: &SampleId, trace: &mut ReasoningTrace) -> StageResult<()> {
        let masked: Vec<NodeId> = target.endpoints().into_iter().cloned().collect();
        let encoded = at("encode", encoder.encode(target, &masked))?;
        trace.target_text = Some(encoded.text.clone());
        let question = self.question(target);

        let prompt = match self.method {
            Method::SimpleAsk => build_simple_prompt(&encoded.text, &question),
            Method::KShotCot => {
                let fixed = self.fixed.clone().unwrap_or_default();
                trace.example_set = at("encode", self.materialize(encoder, &fixed, &masked))?;
                build_cot_prompt(&trace.example_set.examples, &encoded.text, &question)
            }
            Method::GraphAgent => {
                let query = at("embed", self.query.vector(target, &encoded.text))?;
                let selection = at(
                    "select",
                    select_examples(self.store, target, &query, self.task.kind, &self.task.policy, self.seed),
                )?;
                trace.example_set = at("encode", self.materialize(encoder, &selection, &masked))?;
                let inductive = build_inductive_prompt(&trace.example_set.examples);
                trace.inductive_prompt = Some(inductive.clone());
                let reasons = at("induce", self.reasons(&inductive))?;
                if reasons.trim().is_empty() {
                    trace.flag("empty-reasons");
                }
                trace.induced_reasons = Some(reasons.clone());
                build_deductive_prompt(&trace.example_set.examples, &reasons, &encoded.text, &question)
            }
        };
        if trace.example_set.shortfall {
            trace.flag("fewer-examples");
        }
        trace.deductive_prompt = Some(prompt.clone());
        let response = at("deduce", complete(self.backend, &self.llm.request(prompt)))?;
        trace.deductive_response = Some(response.text.clone());
        let answer = match self.task.kind {
            TaskKind::NodeClassification => Answer::Label(at("parse", parse_node_answer(&response.text, &self.task.options))?),
            TaskKind::LinkPrediction => Answer::Link(at("parse", parse_link_answer(&response.text))?),
        };
        trace.parsed_answer = Some(answer);
        Ok(())
    }

    fn reasons(&self, prompt: &str) -> Result<String, ReasonerError> {
        let Some(cache) = &self.reasons_cache else {
            return induce_reasons(self.backend, &self.llm, prompt);
        };
        let key = request_key(&self.llm.request(prompt));
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let reasons = induce_reasons(self.backend, &self.llm, prompt)?;
        cache.lock().unwrap().insert(key, reasons.clone());
        Ok(reasons)
    }

    /// Re-encodes selected records with the target's nodes masked.
    fn materialize(&self, encoder: &Encoder<'_>, sel: &Selection, masked: &[NodeId]) -> Result<ExampleSet, ReasonerError> {
        let mut examples = Vec::with_capacity(sel.picks.len());
        for p in &sel.picks {
            examples.push(Example {
                sample: encoder.encode(&p.sample_id, masked)?,
                label: p.label.clone(),
                similarity: p.similarity,
            });
        }
        Ok(ExampleSet {
            examples,
            positives: sel.positives,
            negatives: sel.negatives,
            shortfall: sel.shortfall,
        })
    }
}
