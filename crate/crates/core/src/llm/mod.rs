//! Chat-completion boundary: a remote JSON-over-HTTP backend, scripted
//! mocks, and a content-addressed record/replay cache.

mod cache;
mod mock;
mod rate;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{request_key, CacheMode, CachedBackend, ReplayCache};
pub use mock::{MajorityLabelMock, Matcher, ScriptedMock};
pub use rate::{Clock, ManualClock, RateLimiter, SystemClock};
pub use remote::RemoteChat;

pub const SYSTEM_PROMPT: &str = "You are an expert reasoning over a knowledge graph.";
pub const DEFAULT_CHAT_MODEL: &str = "gpt-4-0613";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_name: String,
}

impl ChatRequest {
    /// Request with the default system message, temperature 0 and the
    /// default model.
    pub fn new(user_text: impl Into<String>) -> Self {
        Self {
            system_text: SYSTEM_PROMPT.to_string(),
            user_text: user_text.into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            model_name: DEFAULT_CHAT_MODEL.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishState {
    Complete,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub finish_state: FinishState,
    pub usage: Option<Usage>,
}

impl ChatResponse {
    pub fn complete(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            finish_state: FinishState::Complete,
            usage: None,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum LlmError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    TransportExhausted { attempts: u32, message: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("prompt exceeds the model context window: {0}")]
    ContextOverflow(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Decode(String),
    #[error("replay cache has no entry for request {key}")]
    CacheMiss { key: String },
    #[error("cache i/o: {0}")]
    Cache(String),
    #[error("no scripted rule matched the request")]
    NoRuleMatched,
    #[error("backend misconfigured: {0}")]
    Config(String),
    #[error("empty user text")]
    EmptyRequest,
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(req)
    }
}

/// Sends one request through `backend`, rejecting empty prompts up front.
pub fn complete(backend: &dyn ChatBackend, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
    if req.user_text.trim().is_empty() {
        return Err(LlmError::EmptyRequest);
    }
    backend.complete(req)
}
