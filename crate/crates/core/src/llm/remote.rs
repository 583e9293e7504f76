use std::sync::Arc;

use serde::Deserialize;
use serde_json::json;

use super::{ChatBackend, ChatRequest, ChatResponse, FinishState, LlmError, RateLimiter, Usage};
use crate::retry::RetryPolicy;
use crate::transport::{join_url, HttpTransport};

/// Chat-completions client speaking the common `messages` JSON shape.
pub struct RemoteChat {
    url: String,
    token: Option<String>,
    transport: Arc<dyn HttpTransport>,
    retry: RetryPolicy,
    limiter: Option<Arc<RateLimiter>>,
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
    usage: Option<UsageBody>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsageBody {
    prompt_tokens: u64,
    completion_tokens: u64,
}

enum Attempt {
    Transient(String),
    Fatal(LlmError),
}

impl RemoteChat {
    pub fn new(base_url: &str, path: &str, token: Option<String>, transport: Arc<dyn HttpTransport>) -> Self {
        Self {
            url: join_url(base_url, path),
            token,
            transport,
            retry: RetryPolicy::default(),
            limiter: None,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_rate_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<ChatResponse, Attempt> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let resp = self
            .transport
            .post_json(&self.url, self.token.as_deref(), body)
            .map_err(|e| Attempt::Transient(e.to_string()))?;
        match resp.status {
            200..=299 => parse_completion(&resp.body).map_err(Attempt::Fatal),
            401 | 403 => Err(Attempt::Fatal(LlmError::Auth(resp.body))),
            400 | 413 if is_context_overflow(&resp.body) => Err(Attempt::Fatal(LlmError::ContextOverflow(resp.body))),
            408 | 409 | 429 | 500..=599 => Err(Attempt::Transient(format!("HTTP {}: {}", resp.status, resp.body))),
            status => Err(Attempt::Fatal(LlmError::Http { status, body: resp.body })),
        }
    }
}

fn is_context_overflow(body: &str) -> bool {
    let b = body.to_lowercase();
    b.contains("context_length_exceeded") || b.contains("maximum context length") || b.contains("context window")
}

fn parse_completion(body: &str) -> Result<ChatResponse, LlmError> {
    let parsed: CompletionBody = serde_json::from_str(body).map_err(|e| LlmError::Decode(e.to_string()))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| LlmError::Decode("no choices in response".into()))?;
    let finish_state = match choice.finish_reason.as_deref() {
        Some("length") => FinishState::Truncated,
        _ => FinishState::Complete,
    };
    Ok(ChatResponse {
        text: choice.message.content.unwrap_or_default(),
        finish_state,
        usage: parsed.usage.map(|u| Usage {
            prompt_tokens: u.prompt_tokens,
            completion_tokens: u.completion_tokens,
        }),
    })
}

impl ChatBackend for RemoteChat {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let body = json!({
            "model": req.model_name,
            "messages": [
                { "role": "system", "content": req.system_text },
                { "role": "user", "content": req.user_text },
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        });
        self.retry
            .run(|e: &Attempt| matches!(e, Attempt::Transient(_)), || self.attempt(&body))
            .map_err(|(e, attempts)| match e {
                Attempt::Transient(message) => LlmError::TransportExhausted { attempts, message },
                Attempt::Fatal(e) => e,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{HttpResponse, TransportError};
    use std::sync::Mutex;

    struct Scripted {
        replies: Mutex<Vec<Result<HttpResponse, TransportError>>>,
        seen: Mutex<Vec<serde_json::Value>>,
    }

    impl Scripted {
        fn new(mut replies: Vec<Result<HttpResponse, TransportError>>) -> Arc<Self> {
            replies.reverse();
            Arc::new(Self {
                replies: Mutex::new(replies),
                seen: Mutex::new(Vec::new()),
            })
        }
    }

    impl HttpTransport for Scripted {
        fn post_json(&self, _: &str, bearer: Option<&str>, body: &serde_json::Value) -> Result<HttpResponse, TransportError> {
            assert_eq!(bearer, Some("tok"));
            self.seen.lock().unwrap().push(body.clone());
            self.replies.lock().unwrap().pop().expect("unexpected extra request")
        }
    }

    fn ok(text: &str, finish: &str) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse {
            status: 200,
            body: json!({
                "choices": [{ "message": { "content": text }, "finish_reason": finish }],
                "usage": { "prompt_tokens": 10, "completion_tokens": 2 }
            })
            .to_string(),
        })
    }

    fn status(code: u16, body: &str) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse { status: code, body: body.into() })
    }

    fn client(t: Arc<Scripted>) -> RemoteChat {
        RemoteChat::new("http://llm", "/v1/chat/completions", Some("tok".into()), t).with_retry(RetryPolicy::immediate())
    }

    #[test]
    fn request_shape_and_parse() {
        let t = Scripted::new(vec![ok("TRUE", "stop")]);
        let resp = client(t.clone()).complete(&ChatRequest::new("hello")).unwrap();
        assert_eq!(resp.text, "TRUE");
        assert_eq!(resp.finish_state, FinishState::Complete);
        assert_eq!(resp.usage.unwrap().completion_tokens, 2);
        let body = &t.seen.lock().unwrap()[0];
        assert_eq!(body["model"], "gpt-4-0613");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "hello");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn retries_transient_then_succeeds() {
        let t = Scripted::new(vec![Err(TransportError::Timeout), status(503, "busy"), ok("x", "length")]);
        let resp = client(t).complete(&ChatRequest::new("q")).unwrap();
        assert_eq!(resp.finish_state, FinishState::Truncated);
    }

    #[test]
    fn exhausts_after_three() {
        let t = Scripted::new(vec![status(500, "a"), status(502, "b"), status(429, "c")]);
        match client(t).complete(&ChatRequest::new("q")) {
            Err(LlmError::TransportExhausted { attempts: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distinct_fatal_errors() {
        let t = Scripted::new(vec![status(401, "bad key")]);
        assert!(matches!(client(t).complete(&ChatRequest::new("q")), Err(LlmError::Auth(_))));
        let t = Scripted::new(vec![status(400, r#"{"error":{"code":"context_length_exceeded"}}"#)]);
        assert!(matches!(client(t).complete(&ChatRequest::new("q")), Err(LlmError::ContextOverflow(_))));
        let t = Scripted::new(vec![status(404, "nope")]);
        assert!(matches!(client(t).complete(&ChatRequest::new("q")), Err(LlmError::Http { status: 404, .. })));
    }
}
