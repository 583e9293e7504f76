//! Records chat responses once, then replays them without the backend.

use std::sync::Arc;

use graph_agent::llm::{complete, CacheMode, CachedBackend, ChatBackend, ChatRequest, LlmError, ReplayCache, ScriptedMock};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("graph-agent-replay-example");
    let _ = std::fs::remove_dir_all(&dir);
    let scripted = Arc::new(ScriptedMock::from_pairs([("TRUE or FALSE", "TRUE"), ("*", "1. shared pathway")])?);

    let recorder = CachedBackend::wrapping(ReplayCache::new(&dir), CacheMode::Record, scripted.clone() as Arc<dyn ChatBackend>);
    let prompts = ["edge: (dr1, g1)\n\nchoose either TRUE or FALSE", "list the reasons"];
    for p in prompts {
        println!("record: {}", complete(&recorder, &ChatRequest::new(p))?.text);
    }
    println!("backend calls while recording: {}", scripted.calls());

    let replayer = CachedBackend::new(ReplayCache::new(&dir), CacheMode::Replay, || {
        Err(LlmError::Config("no backend in replay mode".into()))
    });
    for p in prompts {
        println!("replay: {}", complete(&replayer, &ChatRequest::new(p))?.text);
    }
    println!("hits {}, misses {}, backend built: {}", replayer.hits(), replayer.misses(), replayer.inner_built());
    match complete(&replayer, &ChatRequest::new("unseen prompt")) {
        Ok(_) => println!("unexpected hit"),
        Err(e) => println!("unseen prompt: {e}"),
    }
    Ok(())
}
