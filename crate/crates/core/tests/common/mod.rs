#![allow(dead_code)]

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use graph_agent::config::RunConfig;
use graph_agent::graph::{write_graph, Graph};
use graph_agent::rng::fnv1a;
use graph_agent::transport::{HttpResponse, HttpTransport, TransportError};

pub fn write_fixture(dir: &Path, g: &Graph) {
    let nodes = BufWriter::new(File::create(dir.join("nodes.jsonl")).unwrap());
    let edges = BufWriter::new(File::create(dir.join("edges.jsonl")).unwrap());
    write_graph(g, nodes, edges).unwrap();
}

pub const LINK_TASK: &str = r#"[task]
kind = "link-prediction"
src_type = "drug"
dst_type = "gene"
"#;

pub const NODE_TASK: &str = r#"[task]
kind = "node-classification"
"#;

/// Config over `nodes.jsonl` / `edges.jsonl` in `dir`, using local hashing
/// embeddings. `extra` is appended verbatim and may add or override tables.
pub fn config_text(task: &str, encoder: &str, backend: &str, extra: &str) -> String {
    format!(
        r#"[data]
nodes = "nodes.jsonl"
edges = "edges.jsonl"

{task}
[encoder]
top_k = 15
attribute_keys_target = ["name", "description"]
attribute_keys_neighbor = ["name"]
{encoder}

[memory]
provider = "hashing"
dim = 128
{extra}

[backend]
rate_limit_per_minute = 100000
retry = {{ attempts = 2, base_delay_ms = 0 }}
{backend}

[run]
seed = 7
workers = 4
output_dir = "out"
"#
    )
}

pub fn write_config(dir: &Path, text: &str) -> RunConfig {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    cfg
}

pub fn traces_path(cfg: &RunConfig) -> PathBuf {
    cfg.run.output_dir.join("traces.jsonl")
}

/// In-process stand-in for a chat-completions endpoint. Replies depend
/// only on the prompt, so runs are reproducible.
pub struct FakeChatEndpoint;

impl HttpTransport for FakeChatEndpoint {
    fn post_json(&self, _url: &str, _bearer: Option<&str>, body: &serde_json::Value) -> Result<HttpResponse, TransportError> {
        let prompt = body["messages"][1]["content"].as_str().unwrap_or_default();
        let text = if prompt.contains("choose either TRUE or FALSE") {
            if fnv1a(prompt.as_bytes()) % 3 == 0 {
                "Step by step, the evidence is weak. FALSE"
            } else {
                "Both entities share a functional group, so TRUE"
            }
        } else {
            "1. Linked pairs share a functional group.\n2. Unlinked pairs do not."
        };
        Ok(HttpResponse {
            status: 200,
            body: serde_json::json!({
                "choices": [{ "message": { "content": text }, "finish_reason": "stop" }],
                "usage": { "prompt_tokens": prompt.len() / 4, "completion_tokens": 12 }
            })
            .to_string(),
        })
    }
}
