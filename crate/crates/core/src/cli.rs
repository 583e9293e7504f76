//! Command implementations behind the `graph-agent` binary.
//!
//! Each command returns the text to print so it can be driven from tests
//! with an injected HTTP transport.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{
    chat_token, embed_token, BackendKind, ConfigError, EmbeddingProvider, ProvenanceChoice, RunConfig, CHAT_TOKEN_ENV,
    EMBED_TOKEN_ENV,
};
use crate::evaluator::{
    evaluate, metrics_from_traces, prepare_task, read_traces, write_traces, EvalError, PreparedTask, RunReport,
};
use crate::graph::{degree_stats, load_graph_files, Graph, GraphError};
use crate::llm::{
    CacheMode, CachedBackend, ChatBackend, LlmError, MajorityLabelMock, RateLimiter, RemoteChat, ReplayCache, ScriptedMock,
};
use crate::memory::{Embedder, GnnEmbeddings, HashingEmbedder, MemoryError, MemoryStore, RemoteEmbedder, SIDECAR_FILE, VECTORS_FILE};
use crate::reasoner::{Method, QuerySource, ReasonerError, ReasoningTrace};
use crate::sample::SampleId;
use crate::transport::{HttpTransport, ReqwestTransport};

pub const MEMORY_DIR: &str = "memory";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACES_FILE: &str = "traces.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Parser)]
#[command(name = "graph-agent", version, about = "Knowledge-graph reasoning with retrieved examples and LLM prompting")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, default_value = "graph-agent.toml")]
    pub config: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the dataset, print counts and degree summary.
    Ingest {
        #[arg(long, requires = "edges")]
        nodes: Option<PathBuf>,
        #[arg(long, requires = "nodes")]
        edges: Option<PathBuf>,
    },
    /// Encode and embed the training split into a persisted store.
    Memorize(Overrides),
    /// Predict the test split and write traces and a report.
    Evaluate(Overrides),
    /// Show the reasoning trace for one sample, e.g. `p12` or `dr1,g3`.
    Explain {
        sample: String,
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print a saved run report.
    Report {
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Recompute metrics from the trace file and compare.
        #[arg(long)]
        check: bool,
    },
}

/// Flags that win over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hops: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// lm | gnn
    #[arg(long)]
    pub provenance: Option<String>,
    /// graph-agent | simple-ask | kshot-cot
    #[arg(long)]
    pub method: Option<String>,
    /// record | replay | passthrough
    #[arg(long)]
    pub cache_mode: Option<CacheMode>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let word = |v: &str| serde_json::Value::String(v.to_string());
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(h) = self.hops {
            cfg.encoder.hops = h;
        }
        if let Some(k) = self.top_k {
            cfg.encoder.top_k = k;
        }
        if let Some(p) = &self.provenance {
            cfg.memory.provenance = serde_json::from_value::<ProvenanceChoice>(word(p))
                .map_err(|_| CliError::Usage(format!("unknown provenance `{p}` (lm | gnn)")))?;
        }
        if let Some(m) = &self.method {
            cfg.run.method = serde_json::from_value::<Method>(word(m))
                .map_err(|_| CliError::Usage(format!("unknown method `{m}` (graph-agent | simple-ask | kshot-cot)")))?;
        }
        if let Some(c) = self.cache_mode {
            cfg.backend.cache_mode = c;
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        if let Some(o) = &self.output_dir {
            cfg.run.output_dir = o.clone();
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Backend(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::MissingPath { .. } => Self::Data(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<MemoryError> for CliError {
    fn from(e: MemoryError) -> Self {
        match e {
            MemoryError::Provider { .. } => Self::Backend(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        Self::Backend(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Memory(m) => m.into(),
            EvalError::Graph(g) => g.into(),
            EvalError::Reasoner(ReasonerError::Llm(l)) => l.into(),
            EvalError::Reasoner(ReasonerError::Embed(m)) => Self::Backend(m),
            other => Self::Data(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Process-wide resources a command may need. `transport` defaults to a
/// reqwest client built on first use.
#[derive(Default, Clone)]
pub struct Runtime {
    pub transport: Option<Arc<dyn HttpTransport>>,
}

impl Runtime {
    pub fn with_transport(transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            transport: Some(transport),
        }
    }

    fn transport(&self, timeout_secs: u64) -> Result<Arc<dyn HttpTransport>, CliError> {
        match &self.transport {
            Some(t) => Ok(Arc::clone(t)),
            None => Ok(Arc::new(
                ReqwestTransport::new(Duration::from_secs(timeout_secs)).map_err(|e| CliError::Backend(e.to_string()))?,
            )),
        }
    }
}

pub fn execute(cli: &Cli, rt: &Runtime) -> Result<String, CliError> {
    match &cli.command {
        Command::Ingest { nodes: Some(n), edges: Some(e) } => cmd_ingest(&load_graph_files(n, e)?),
        Command::Ingest { .. } => {
            let cfg = load_config(&cli.config, &Overrides::default())?;
            cmd_ingest(&load_graph_files(&cfg.data.nodes, &cfg.data.edges)?)
        }
        Command::Memorize(o) => cmd_memorize(&load_config(&cli.config, o)?, rt),
        Command::Evaluate(o) => cmd_evaluate(&load_config(&cli.config, o)?, rt).map(|(text, _)| text),
        Command::Explain { sample, traces, json } => {
            let path = match traces {
                Some(p) => p.clone(),
                None => load_config(&cli.config, &Overrides::default())?.run.output_dir.join(TRACES_FILE),
            };
            cmd_explain(&path, sample, *json)
        }
        Command::Report { report, json, check } => {
            let path = match report {
                Some(p) => p.clone(),
                None => load_config(&cli.config, &Overrides::default())?.run.output_dir.join(REPORT_FILE),
            };
            cmd_report(&path, *json, *check)
        }
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

/// `954438` → `954,438`.
pub fn group_digits(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn cmd_ingest(g: &Graph) -> Result<String, CliError> {
    let stats = degree_stats(g);
    let mut s = String::new();
    let _ = writeln!(s, "{} nodes", group_digits(g.node_count()));
    let _ = writeln!(s, "{} edges", group_digits(g.edge_count()));
    let types = g.type_counts();
    if !types.is_empty() {
        let _ = writeln!(s, "node types:");
        for (t, c) in &types {
            let avg = stats.type_average(t).unwrap_or(0.0);
            let _ = writeln!(s, "  {t:<20}{:>10}  mean degree {avg:.2}", group_digits(*c));
        }
    }
    let etypes = g.edge_type_counts();
    if !etypes.is_empty() {
        let _ = writeln!(s, "edge types:");
        for (t, c) in &etypes {
            let _ = writeln!(s, "  {t:<20}{:>10}", group_digits(*c));
        }
    }
    let labelled = g.nodes().iter().filter(|n| n.label.is_some()).count();
    let _ = writeln!(s, "{} labelled nodes", group_digits(labelled));
    Ok(s)
}

enum Source {
    Lm(Box<dyn Embedder>),
    Gnn(GnnEmbeddings),
}

impl Source {
    fn query(&self) -> QuerySource<'_> {
        match self {
            Self::Lm(e) => QuerySource::Lm(e.as_ref()),
            Self::Gnn(g) => QuerySource::Gnn(g),
        }
    }
}

fn memory_source(cfg: &RunConfig, rt: &Runtime) -> Result<Source, CliError> {
    match cfg.memory.provenance {
        ProvenanceChoice::Gnn => {
            let path = cfg.memory.gnn_vectors.as_ref().expect("validated");
            let file = File::open(path).map_err(|e| io_err(path, e))?;
            Ok(Source::Gnn(GnnEmbeddings::from_jsonl(BufReader::new(file))?))
        }
        ProvenanceChoice::Lm => match cfg.memory.provider {
            EmbeddingProvider::Hashing => Ok(Source::Lm(Box::new(HashingEmbedder::new(cfg.memory.dim)))),
            EmbeddingProvider::Remote => {
                let token = embed_token()
                    .ok_or_else(|| CliError::Backend(format!("authentication failed: set {EMBED_TOKEN_ENV}")))?;
                Ok(Source::Lm(Box::new(RemoteEmbedder::new(
                    &cfg.memory.base_url,
                    &cfg.memory.path,
                    cfg.memory.model.clone(),
                    Some(token),
                    rt.transport(cfg.backend.timeout_secs)?,
                ))))
            }
        },
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    records: usize,
    dim: usize,
    provenance: crate::memory::Provenance,
    seed: u64,
    store_sha256: String,
    config: &'a RunConfig,
}

fn store_digest(dir: &Path) -> Result<String, CliError> {
    let mut h = Sha256::new();
    for name in [VECTORS_FILE, SIDECAR_FILE] {
        let p = dir.join(name);
        h.update(fs::read(&p).map_err(|e| io_err(&p, e))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn prepare(cfg: &RunConfig) -> Result<(Graph, PreparedTask), CliError> {
    let g = load_graph_files(&cfg.data.nodes, &cfg.data.edges)?;
    let prepared = prepare_task(&g, &cfg.task, cfg.run.seed)?;
    Ok((g, prepared))
}

pub fn cmd_memorize(cfg: &RunConfig, rt: &Runtime) -> Result<String, CliError> {
    let (g, prepared) = prepare(cfg)?;
    let stats = degree_stats(&g);
    let source = memory_source(cfg, rt)?;
    let store = crate::evaluator::build_memory(&g, &stats, &prepared, &cfg.eval_settings(), source.query())?;
    let dir = cfg.run.output_dir.join(MEMORY_DIR);
    store.save(&dir)?;
    let digest = store_digest(&dir)?;
    let manifest = Manifest {
        schema_version: 1,
        records: store.len(),
        dim: store.dim(),
        provenance: store.provenance(),
        seed: cfg.run.seed,
        store_sha256: digest.clone(),
        config: cfg,
    };
    let mpath = cfg.run.output_dir.join(MANIFEST_FILE);
    fs::write(&mpath, serde_json::to_string_pretty(&manifest).expect("manifest serializes")).map_err(|e| io_err(&mpath, e))?;
    Ok(format!(
        "memorized {} records (dim {}) to {}\nstore sha256 {digest}\n",
        store.len(),
        store.dim(),
        dir.display()
    ))
}

fn chat_backend(cfg: &RunConfig, rt: &Runtime) -> Result<Arc<dyn ChatBackend>, CliError> {
    let b = cfg.backend.clone();
    let inner: Arc<dyn Fn() -> Result<Arc<dyn ChatBackend>, LlmError> + Send + Sync> = match b.kind {
        BackendKind::MockMajority => Arc::new(|| Ok(Arc::new(MajorityLabelMock::new()) as Arc<dyn ChatBackend>)),
        BackendKind::MockScripted => {
            let rules = b.scripted.clone();
            Arc::new(move || {
                let m = ScriptedMock::from_pairs(rules.iter().map(|(p, r)| (p.as_str(), r.as_str())))?;
                Ok(Arc::new(m) as Arc<dyn ChatBackend>)
            })
        }
        BackendKind::Remote => {
            let rt = rt.clone();
            let b = b.clone();
            let limiter = Arc::new(RateLimiter::per_minute(b.rate_limit_per_minute.max(1)));
            Arc::new(move || {
                let token = chat_token().ok_or_else(|| LlmError::Auth(format!("set {CHAT_TOKEN_ENV}")))?;
                let transport = rt.transport(b.timeout_secs).map_err(|e| LlmError::Config(e.to_string()))?;
                Ok(Arc::new(
                    RemoteChat::new(&b.base_url, &b.path, Some(token), transport)
                        .with_retry(b.retry)
                        .with_rate_limiter(Arc::clone(&limiter)),
                ) as Arc<dyn ChatBackend>)
            })
        }
    };
    match (&b.cache_dir, b.cache_mode) {
        (Some(dir), mode) if mode != CacheMode::Passthrough => {
            Ok(Arc::new(CachedBackend::new(ReplayCache::new(dir.clone()), mode, move || inner())))
        }
        _ => Ok(inner()?),
    }
}

/// Runs evaluation and writes traces and report under the output dir.
pub fn cmd_evaluate(cfg: &RunConfig, rt: &Runtime) -> Result<(String, RunReport), CliError> {
    let (g, prepared) = prepare(cfg)?;
    let stats = degree_stats(&g);
    let dir = cfg.run.output_dir.join(MEMORY_DIR);
    if !dir.join(SIDECAR_FILE).exists() {
        return Err(CliError::Data(format!(
            "no memory store at {}; run `graph-agent memorize` with this config first",
            dir.display()
        )));
    }
    let store = MemoryStore::load(&dir)?;
    if store.len() != prepared.split.train.len() || prepared.split.train.iter().any(|id| store.get(id).is_none()) {
        return Err(CliError::Data(format!(
            "memory store at {} was built for a different split; rerun `graph-agent memorize`",
            dir.display()
        )));
    }
    let source = memory_source(cfg, rt)?;
    let backend = chat_backend(cfg, rt)?;
    let mut out = evaluate(&g, &stats, &prepared, &store, &cfg.eval_settings(), source.query(), backend.as_ref())?;

    let traces_path = cfg.run.output_dir.join(TRACES_FILE);
    write_traces(&traces_path, &out.traces)?;
    out.report.trace_file = Some(traces_path.display().to_string());
    out.report.config = serde_json::to_value(cfg).expect("config serializes");
    let rpath = cfg.run.output_dir.join(REPORT_FILE);
    fs::write(&rpath, serde_json::to_string_pretty(&out.report).expect("report serializes")).map_err(|e| io_err(&rpath, e))?;

    let backend_failures = out
        .traces
        .iter()
        .filter(|t| t.error.as_ref().is_some_and(|e| matches!(e.stage.as_str(), "embed" | "induce" | "deduce")))
        .count();
    if backend_failures > 0 {
        return Err(CliError::Backend(format!(
            "{backend_failures} of {} samples failed at the backend; see {}",
            out.traces.len(),
            traces_path.display()
        )));
    }
    Ok((out.report.to_table(), out.report))
}

/// Human-readable rendering of one trace.
pub fn render_trace(t: &ReasoningTrace) -> String {
    let mut s = String::new();
    let section = |s: &mut String, title: &str, body: &str| {
        let _ = writeln!(s, "== {title} ==\n{}\n", body.trim_end());
    };
    let _ = writeln!(s, "target {} (truth: {})\n", t.target, t.truth.as_deref().unwrap_or("unknown"));
    section(&mut s, "Target", t.target_text.as_deref().unwrap_or("(not encoded)"));
    let examples: Vec<String> = t
        .example_set
        .examples
        .iter()
        .map(|e| match e.similarity {
            Some(sim) => format!("{} [{}] similarity {sim:.4}", e.sample.sample_id, e.label),
            None => format!("{} [{}]", e.sample.sample_id, e.label),
        })
        .collect();
    section(&mut s, "Examples", &if examples.is_empty() { "(none)".to_string() } else { examples.join("\n") });
    section(&mut s, "Inductive prompt", t.inductive_prompt.as_deref().unwrap_or("(none)"));
    section(&mut s, "Induced reasons", t.induced_reasons.as_deref().unwrap_or("(none)"));
    section(&mut s, "Deductive prompt", t.deductive_prompt.as_deref().unwrap_or("(none)"));
    section(&mut s, "Response", t.deductive_response.as_deref().unwrap_or("(none)"));
    let answer = match &t.parsed_answer {
        Some(a) => serde_json::to_string(a).expect("answer serializes"),
        None => "(unparsed)".into(),
    };
    let mut tail = format!("{answer} ({})", if t.is_correct() { "correct" } else { "incorrect" });
    if let Some(e) = &t.error {
        tail.push_str(&format!("\nerror at {}: {}", e.stage, e.message));
    }
    if !t.flags.is_empty() {
        tail.push_str(&format!("\nflags: {}", t.flags.join(", ")));
    }
    section(&mut s, "Answer", &tail);
    s
}

pub fn cmd_explain(traces: &Path, sample: &str, json: bool) -> Result<String, CliError> {
    let id: SampleId = sample.parse().map_err(|e: String| CliError::Usage(e))?;
    let all = read_traces(traces)?;
    let t = all
        .iter()
        .find(|t| t.target == id)
        .ok_or_else(|| CliError::Data(format!("no trace for sample `{id}` in {}", traces.display())))?;
    if json {
        Ok(format!("{}\n", serde_json::to_string_pretty(t).expect("trace serializes")))
    } else {
        Ok(render_trace(t))
    }
}

pub fn cmd_report(path: &Path, json: bool, check: bool) -> Result<String, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let mut out = if json { format!("{text}\n") } else { report.to_table() };
    if check {
        let tpath = report
            .trace_file
            .as_ref()
            .map(PathBuf::from)
            .ok_or_else(|| CliError::Data("report has no trace file".into()))?;
        let recomputed = metrics_from_traces(report.task, &read_traces(&tpath)?)?;
        if recomputed != report.metrics {
            return Err(CliError::Data(format!("metrics in {} do not match {}", path.display(), tpath.display())));
        }
        out.push_str("metrics match the trace file\n");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits() {
        assert_eq!(group_digits(954_438), "954,438");
        assert_eq!(group_digits(0), "0");
        assert_eq!(group_digits(100), "100");
        assert_eq!(group_digits(1000), "1,000");
    }

    #[test]
    fn parses_commands() {
        let cli = Cli::try_parse_from(["graph-agent", "-c", "x.toml", "evaluate", "--seed", "3", "--cache-mode", "replay"]).unwrap();
        match cli.command {
            Command::Evaluate(o) => {
                assert_eq!(o.seed, Some(3));
                assert_eq!(o.cache_mode, Some(CacheMode::Replay));
            }
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["graph-agent", "ingest", "--nodes", "n"]).is_err());
    }
}
