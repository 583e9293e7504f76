//! TOML run configuration. Secrets are read from the environment only.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::EncoderConfig;
use crate::evaluator::{EvalSettings, TaskDefinition};
use crate::llm::{CacheMode, DEFAULT_CHAT_MODEL};
use crate::memory::{MemorizeOptions, RemoteEmbedder};
use crate::reasoner::{ExamplePolicy, LlmSettings, Method};
use crate::retry::RetryPolicy;

pub const CHAT_TOKEN_ENV: &str = "GRAPH_AGENT_CHAT_TOKEN";
pub const EMBED_TOKEN_ENV: &str = "GRAPH_AGENT_EMBED_TOKEN";
/// Fallback for both tokens.
pub const SHARED_TOKEN_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{what} not found: {path}")]
    MissingPath { what: &'static str, path: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub nodes: PathBuf,
    pub edges: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProvenanceChoice {
    #[default]
    Lm,
    Gnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingProvider {
    /// Local feature hashing; no network.
    #[default]
    Hashing,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryConfig {
    pub provenance: ProvenanceChoice,
    pub provider: EmbeddingProvider,
    /// Dimension of the hashing provider.
    pub dim: usize,
    pub base_url: String,
    pub path: String,
    pub model: String,
    /// Node vectors for `provenance = "gnn"`, JSON lines of `{id, vector}`.
    pub gnn_vectors: Option<PathBuf>,
    pub batch_size: usize,
    pub max_in_flight: usize,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        let m = MemorizeOptions::default();
        Self {
            provenance: ProvenanceChoice::Lm,
            provider: EmbeddingProvider::Hashing,
            dim: 256,
            base_url: "https://api.openai.com".into(),
            path: "/v1/embeddings".into(),
            model: RemoteEmbedder::DEFAULT_MODEL.into(),
            gnn_vectors: None,
            batch_size: m.batch_size,
            max_in_flight: m.max_in_flight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    #[default]
    Remote,
    /// Answers with the majority example label.
    MockMajority,
    /// Pattern rules from `scripted`.
    MockScripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: String,
    pub path: String,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub rate_limit_per_minute: usize,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    pub cache_mode: CacheMode,
    pub cache_dir: Option<PathBuf>,
    /// `[pattern, response]` pairs; `*` matches anything.
    pub scripted: Vec<(String, String)>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Remote,
            base_url: "https://api.openai.com".into(),
            path: "/v1/chat/completions".into(),
            model: DEFAULT_CHAT_MODEL.into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            rate_limit_per_minute: 60,
            timeout_secs: 120,
            retry: RetryPolicy::default(),
            cache_mode: CacheMode::Passthrough,
            cache_dir: None,
            scripted: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub method: Method,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub record_wall_time: bool,
    pub reasons_cache: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            method: Method::GraphAgent,
            workers: 4,
            output_dir: PathBuf::from("out"),
            record_wall_time: false,
            reasons_cache: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub task: TaskDefinition,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub policy: ExamplePolicy,
    #[serde(default)]
    pub memory: MemoryConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.nodes);
        fix(&mut self.data.edges);
        fix(&mut self.run.output_dir);
        if let Some(p) = self.memory.gnn_vectors.as_mut() {
            fix(p);
        }
        if let Some(p) = self.backend.cache_dir.as_mut() {
            fix(p);
        }
    }

    /// Checks referenced inputs exist and settings are coherent.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (what, p) in [("node file", &self.data.nodes), ("edge file", &self.data.edges)] {
            if !p.exists() {
                return Err(ConfigError::MissingPath {
                    what,
                    path: p.display().to_string(),
                });
            }
        }
        if self.memory.provenance == ProvenanceChoice::Gnn {
            match &self.memory.gnn_vectors {
                None => return Err(ConfigError::Invalid("provenance gnn requires memory.gnn_vectors".into())),
                Some(p) if !p.exists() => {
                    return Err(ConfigError::MissingPath {
                        what: "gnn vector file",
                        path: p.display().to_string(),
                    })
                }
                Some(_) => {}
            }
        }
        self.encoder.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.memory.provider == EmbeddingProvider::Hashing && self.memory.dim == 0 {
            return Err(ConfigError::Invalid("memory.dim must be positive".into()));
        }
        if self.backend.cache_mode != CacheMode::Passthrough && self.backend.cache_dir.is_none() {
            return Err(ConfigError::Invalid("cache_mode record/replay requires backend.cache_dir".into()));
        }
        if self.backend.kind == BackendKind::MockScripted && self.backend.scripted.is_empty() {
            return Err(ConfigError::Invalid("mock-scripted backend needs at least one rule".into()));
        }
        Ok(())
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            seed: self.run.seed,
            method: self.run.method,
            workers: self.run.workers,
            encoder: self.encoder.clone(),
            policy: self.policy,
            llm: LlmSettings {
                model_name: self.backend.model.clone(),
                temperature: self.backend.temperature,
                max_output_tokens: self.backend.max_output_tokens,
            },
            memorize: MemorizeOptions {
                batch_size: self.memory.batch_size,
                max_in_flight: self.memory.max_in_flight,
                retry: self.backend.retry,
            },
            record_wall_time: self.run.record_wall_time,
            reasons_cache: self.run.reasons_cache,
        }
    }
}

fn env_token(primary: &str) -> Option<String> {
    [primary, SHARED_TOKEN_ENV]
        .iter()
        .find_map(|k| std::env::var(k).ok().filter(|v| !v.is_empty()))
}

pub fn chat_token() -> Option<String> {
    env_token(CHAT_TOKEN_ENV)
}

pub fn embed_token() -> Option<String> {
    env_token(EMBED_TOKEN_ENV)
}
