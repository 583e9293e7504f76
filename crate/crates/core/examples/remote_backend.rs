//! Sends one link question to an OpenAI-compatible endpoint.
//!
//! Needs `GRAPH_AGENT_CHAT_TOKEN` (or `OPENAI_API_KEY`). Set
//! `GRAPH_AGENT_BASE_URL` to target another server.

use std::sync::Arc;
use std::time::Duration;

use graph_agent::config::{chat_token, CHAT_TOKEN_ENV};
use graph_agent::encoder::{Encoder, EncoderConfig};
use graph_agent::graph::degree_stats;
use graph_agent::llm::{complete, RateLimiter, RemoteChat};
use graph_agent::reasoner::{build_simple_prompt, link_question, parse_link_answer, LlmSettings};
use graph_agent::retry::RetryPolicy;
use graph_agent::sample::SampleId;
use graph_agent::synthetic::biomedical_fixture;
use graph_agent::transport::ReqwestTransport;

fn main() -> anyhow::Result<()> {
    let Some(token) = chat_token() else {
        println!("set {CHAT_TOKEN_ENV} to run this example");
        return Ok(());
    };
    let base = std::env::var("GRAPH_AGENT_BASE_URL").unwrap_or_else(|_| "https://api.openai.com".into());
    let transport = Arc::new(ReqwestTransport::new(Duration::from_secs(60))?);
    let chat = RemoteChat::new(&base, "/v1/chat/completions", Some(token), transport)
        .with_retry(RetryPolicy::default())
        .with_rate_limiter(Arc::new(RateLimiter::per_minute(20)));

    let g = biomedical_fixture(11);
    let stats = degree_stats(&g);
    let e = &g.edges()[0];
    let id = SampleId::edge(e.src.as_str(), e.dst.as_str());
    let text = Encoder::new(&g, &stats, EncoderConfig::biomedical()).encode(&id, &[e.src.clone(), e.dst.clone()])?.text;
    let prompt = build_simple_prompt(&text, &link_question(&e.src, &e.dst));

    let resp = complete(&chat, &LlmSettings::default().request(prompt))?;
    println!("{}\n\nparsed: {:?}", resp.text, parse_link_answer(&resp.text));
    Ok(())
}
