use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use crate::util::fnv1a64;

use super::{BackendError, EmbeddingVector, PlanRequest, Planner, Translator};

/// Hex FNV-1a of the compact, key-sorted JSON encoding of `body`.
fn request_key(body: &Value) -> String {
    let canonical = serde_json::to_string(body).expect("JSON values serialize");
    format!("{:016x}", fnv1a64(canonical.as_bytes()))
}

pub fn plan_request_key(prompt: &str, n: usize, temperature: f64, seed: u64) -> String {
    request_key(&json!({
        "prompt": prompt,
        "n": n,
        "temperature": temperature,
        "seed": seed,
    }))
}

fn embed_request_key(text: &str) -> String {
    request_key(&json!({ "input": text }))
}

/// Request-hash to response map shared by recorders and replayers.
#[derive(Debug, Default)]
pub struct FixtureStore {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, Value>>,
}

impl FixtureStore {
    pub fn in_memory() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// Opens `path`, starting empty when it does not exist yet.
    pub fn open(path: &Path) -> Result<Arc<Self>, BackendError> {
        let entries = if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?
        } else {
            BTreeMap::new()
        };
        Ok(Arc::new(Self {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
        }))
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("fixture lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &str) -> Option<Value> {
        self.entries.lock().expect("fixture lock").get(key).cloned()
    }

    fn put(&self, key: String, value: Value) {
        self.entries.lock().expect("fixture lock").insert(key, value);
    }

    pub fn to_json(&self) -> String {
        let entries = self.entries.lock().expect("fixture lock");
        serde_json::to_string_pretty(&*entries).expect("JSON values serialize")
    }

    /// Writes the store back to the file it was opened from.
    pub fn save(&self) -> Result<(), BackendError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))
    }
}

pub struct RecordingPlanner<P> {
    inner: P,
    store: Arc<FixtureStore>,
}

impl<P: Planner> RecordingPlanner<P> {
    pub fn new(inner: P, store: Arc<FixtureStore>) -> Self {
        Self { inner, store }
    }
}

impl<P: Planner> Planner for RecordingPlanner<P> {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        let out = self.inner.propose(request, n, temperature, seed)?;
        self.store.put(
            plan_request_key(&request.prompt, n, temperature, seed),
            json!(out),
        );
        Ok(out)
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}

/// Serves recorded proposals; never touches the network.
pub struct ReplayPlanner {
    store: Arc<FixtureStore>,
}

impl ReplayPlanner {
    pub fn new(store: Arc<FixtureStore>) -> Self {
        Self { store }
    }
}

impl Planner for ReplayPlanner {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        let key = plan_request_key(&request.prompt, n, temperature, seed);
        let value = self
            .store
            .get(&key)
            .ok_or_else(|| BackendError::ReplayMiss(key.clone()))?;
        serde_json::from_value(value)
            .map_err(|e| BackendError::Protocol(format!("fixture {key}: {e}")))
    }

    fn name(&self) -> &str {
        "replay"
    }
}

pub struct RecordingTranslator<T> {
    inner: T,
    store: Arc<FixtureStore>,
}

impl<T: Translator> RecordingTranslator<T> {
    pub fn new(inner: T, store: Arc<FixtureStore>) -> Self {
        Self { inner, store }
    }
}

impl<T: Translator> Translator for RecordingTranslator<T> {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        let v = self.inner.embed(text)?;
        self.store.put(embed_request_key(text), json!(v));
        Ok(v)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        let out = self.inner.embed_batch(texts)?;
        for (text, v) in texts.iter().zip(&out) {
            self.store.put(embed_request_key(text), json!(v));
        }
        Ok(out)
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}

pub struct ReplayTranslator {
    store: Arc<FixtureStore>,
}

impl ReplayTranslator {
    pub fn new(store: Arc<FixtureStore>) -> Self {
        Self { store }
    }
}

impl Translator for ReplayTranslator {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        let key = embed_request_key(text);
        let value = self
            .store
            .get(&key)
            .ok_or_else(|| BackendError::ReplayMiss(key.clone()))?;
        serde_json::from_value(value)
            .map_err(|e| BackendError::Protocol(format!("fixture {key}: {e}")))
    }

    fn name(&self) -> &str {
        "replay"
    }
}
