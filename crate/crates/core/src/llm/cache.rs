use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheMode {
    /// Serve hits from disk; call the backend on a miss and store the reply.
    Record,
    /// Serve hits from disk; a miss is an error and no backend is built.
    Replay,
    /// Ignore the cache entirely.
    Passthrough,
}

impl FromStr for CacheMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record" => Ok(Self::Record),
            "replay" => Ok(Self::Replay),
            "passthrough" => Ok(Self::Passthrough),
            other => Err(format!("unknown cache mode `{other}` (record | replay | passthrough)")),
        }
    }
}

/// SHA-256 over the request's JSON serialization. Field order is fixed by
/// the struct definition, so the key is stable across runs.
pub fn request_key(req: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"graph-agent/chat/v1\n");
    hasher.update(serde_json::to_vec(req).expect("request serializes"));
    hex::encode(hasher.finalize())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    request: ChatRequest,
    response: ChatResponse,
}

/// One JSON file per entry at `<dir>/<key[..2]>/<key>.json`.
pub struct ReplayCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ReplayCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<ChatResponse>, LlmError> {
        let path = self.path_for(key);
        match fs::read(&path) {
            Ok(bytes) => {
                let entry: Entry = serde_json::from_slice(&bytes).map_err(|e| LlmError::Cache(format!("{}: {e}", path.display())))?;
                Ok(Some(entry.response))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(LlmError::Cache(format!("{}: {e}", path.display()))),
        }
    }

    pub fn put(&self, req: &ChatRequest, resp: &ChatResponse) -> Result<(), LlmError> {
        let key = request_key(req);
        let path = self.path_for(&key);
        let entry = Entry {
            key,
            request: req.clone(),
            response: resp.clone(),
        };
        let bytes = serde_json::to_vec_pretty(&entry).map_err(|e| LlmError::Cache(e.to_string()))?;
        let _guard = self.write_lock.lock().unwrap();
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent).map_err(|e| LlmError::Cache(format!("{}: {e}", parent.display())))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, bytes).map_err(|e| LlmError::Cache(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| LlmError::Cache(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        let Ok(shards) = fs::read_dir(&self.dir) else { return 0 };
        shards
            .flatten()
            .filter_map(|d| fs::read_dir(d.path()).ok())
            .map(|files| files.flatten().filter(|f| f.path().extension().is_some_and(|e| e == "json")).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type Factory = Box<dyn Fn() -> Result<Arc<dyn ChatBackend>, LlmError> + Send + Sync>;

/// Backend wrapper applying a [`CacheMode`]. The inner backend is built
/// lazily by `factory` on the first request that needs it, so replay runs
/// never construct a network client.
pub struct CachedBackend {
    cache: ReplayCache,
    mode: CacheMode,
    factory: Factory,
    inner: Mutex<Option<Arc<dyn ChatBackend>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl CachedBackend {
    pub fn new(
        cache: ReplayCache,
        mode: CacheMode,
        factory: impl Fn() -> Result<Arc<dyn ChatBackend>, LlmError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            cache,
            mode,
            factory: Box::new(factory),
            inner: Mutex::new(None),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn wrapping(cache: ReplayCache, mode: CacheMode, backend: Arc<dyn ChatBackend>) -> Self {
        Self::new(cache, mode, move || Ok(Arc::clone(&backend)))
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    pub fn inner_built(&self) -> bool {
        self.inner.lock().unwrap().is_some()
    }

    fn inner(&self) -> Result<Arc<dyn ChatBackend>, LlmError> {
        let mut slot = self.inner.lock().unwrap();
        if let Some(b) = slot.as_ref() {
            return Ok(Arc::clone(b));
        }
        let built = (self.factory)()?;
        *slot = Some(Arc::clone(&built));
        Ok(built)
    }
}

impl ChatBackend for CachedBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        if self.mode == CacheMode::Passthrough {
            return self.inner()?.complete(req);
        }
        let key = request_key(req);
        if let Some(hit) = self.cache.get(&key)? {
            self.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        if self.mode == CacheMode::Replay {
            return Err(LlmError::CacheMiss { key });
        }
        let resp = self.inner()?.complete(req)?;
        self.cache.put(req, &resp)?;
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedMock;

    #[test]
    fn key_covers_every_field() {
        let base = ChatRequest::new("prompt");
        let k = request_key(&base);
        assert_eq!(k, request_key(&base.clone()));
        let variants = [
            ChatRequest { system_text: "s".into(), ..base.clone() },
            ChatRequest { user_text: "prompt ".into(), ..base.clone() },
            ChatRequest { temperature: 0.1, ..base.clone() },
            ChatRequest { max_output_tokens: 7, ..base.clone() },
            ChatRequest { model_name: "other".into(), ..base.clone() },
        ];
        for v in variants {
            assert_ne!(request_key(&v), k);
        }
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Arc::new(ScriptedMock::always("TRUE"));
        let rec = CachedBackend::wrapping(ReplayCache::new(dir.path()), CacheMode::Record, mock.clone());
        let req = ChatRequest::new("q1");
        assert_eq!(rec.complete(&req).unwrap().text, "TRUE");
        assert_eq!(rec.complete(&req).unwrap().text, "TRUE");
        assert_eq!(mock.calls(), 1);
        assert_eq!(rec.hits(), 1);
        assert_eq!(ReplayCache::new(dir.path()).len(), 1);

        let built = Arc::new(AtomicUsize::new(0));
        let counter = built.clone();
        let replay = CachedBackend::new(ReplayCache::new(dir.path()), CacheMode::Replay, move || {
            counter.fetch_add(1, Ordering::SeqCst);
            Err(LlmError::Config("network disabled".into()))
        });
        assert_eq!(replay.complete(&req).unwrap().text, "TRUE");
        assert!(matches!(replay.complete(&ChatRequest::new("q2")), Err(LlmError::CacheMiss { .. })));
        assert_eq!(built.load(Ordering::SeqCst), 0);
        assert!(!replay.inner_built());
    }

    #[test]
    fn passthrough_skips_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Arc::new(ScriptedMock::always("x"));
        let b = CachedBackend::wrapping(ReplayCache::new(dir.path()), CacheMode::Passthrough, mock.clone());
        b.complete(&ChatRequest::new("a")).unwrap();
        b.complete(&ChatRequest::new("a")).unwrap();
        assert_eq!(mock.calls(), 2);
        assert!(ReplayCache::new(dir.path()).is_empty());
    }
}
