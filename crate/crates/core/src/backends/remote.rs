use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{pad_cyclic, BackendError, EmbeddingVector, PlanRequest, Planner, Translator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(4),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based): doubling, capped.
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteConfig {
    pub url: String,
    pub token: Option<String>,
    pub model: Option<String>,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token: None,
            model: None,
            timeout: Duration::from_secs(60),
            retry: RetryPolicy::default(),
        }
    }

    /// Reads `KBREASON_<kind>_URL`, `_TOKEN` and `_MODEL`.
    pub fn from_env(kind: &str) -> Result<Self, BackendError> {
        let var = |suffix: &str| std::env::var(format!("KBREASON_{kind}_{suffix}")).ok();
        let url = var("URL").ok_or_else(|| {
            BackendError::Config(format!("KBREASON_{kind}_URL is not set"))
        })?;
        let mut cfg = Self::new(url);
        cfg.token = var("TOKEN");
        cfg.model = var("MODEL");
        Ok(cfg)
    }

    fn client(&self) -> Result<Client, BackendError> {
        Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))
    }
}

fn post_json(client: &Client, cfg: &RemoteConfig, body: &Value) -> Result<Value, BackendError> {
    let mut last = BackendError::Transport("no attempts made".into());
    for attempt in 0..cfg.retry.attempts.max(1) {
        if attempt > 0 {
            let delay = cfg.retry.delay(attempt - 1);
            log::warn!("retrying {} in {delay:?}: {last}", cfg.url);
            std::thread::sleep(delay);
        }
        let mut req = client.post(&cfg.url).json(body);
        if let Some(token) = &cfg.token {
            req = req.bearer_auth(token);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                last = BackendError::Transport(e.to_string());
                continue;
            }
        };
        let status = resp.status();
        if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
            last = BackendError::Transport(format!("HTTP {status}"));
            continue;
        }
        let text = resp
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Protocol(format!("HTTP {status}: {text}")));
        }
        return serde_json::from_str(&text)
            .map_err(|e| BackendError::Protocol(format!("invalid JSON response: {e}")));
    }
    Err(last)
}

/// Completions-style generative backend.
pub struct RemotePlanner {
    cfg: RemoteConfig,
    client: Client,
    max_tokens: u32,
    stop: Vec<String>,
}

impl RemotePlanner {
    pub fn new(cfg: RemoteConfig) -> Result<Self, BackendError> {
        Ok(Self {
            client: cfg.client()?,
            cfg,
            max_tokens: 32,
            stop: vec!["\n".into()],
        })
    }

    pub fn request_body(&self, prompt: &str, n: usize, temperature: f64, seed: u64) -> Value {
        let mut body = json!({
            "prompt": prompt,
            "n": n,
            "temperature": temperature,
            "max_tokens": self.max_tokens,
            "stop": self.stop,
            "seed": seed,
        });
        if let Some(model) = &self.cfg.model {
            body["model"] = json!(model);
        }
        body
    }
}

impl Planner for RemotePlanner {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        let body = self.request_body(&request.prompt, n, temperature, seed);
        let resp = post_json(&self.client, &self.cfg, &body)?;
        let choices = resp["choices"]
            .as_array()
            .ok_or_else(|| BackendError::Protocol("response has no choices array".into()))?;
        let texts = choices
            .iter()
            .map(|c| {
                c["text"]
                    .as_str()
                    .map(str::to_string)
                    .ok_or_else(|| BackendError::Protocol("choice without text".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if texts.is_empty() {
            return Err(BackendError::Protocol("empty choices array".into()));
        }
        Ok(pad_cyclic(texts, n))
    }

    fn name(&self) -> &str {
        "remote"
    }
}

/// Embeddings-style backend (`input` list in, `data[].embedding` out).
pub struct RemoteTranslator {
    cfg: RemoteConfig,
    client: Client,
    batch: usize,
}

impl RemoteTranslator {
    pub fn new(cfg: RemoteConfig) -> Result<Self, BackendError> {
        Ok(Self {
            client: cfg.client()?,
            cfg,
            batch: 64,
        })
    }

    fn call(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        let mut body = json!({ "input": texts });
        if let Some(model) = &self.cfg.model {
            body["model"] = json!(model);
        }
        let resp = post_json(&self.client, &self.cfg, &body)?;
        let data = resp["data"]
            .as_array()
            .ok_or_else(|| BackendError::Protocol("response has no data array".into()))?;
        if data.len() != texts.len() {
            return Err(BackendError::Protocol(format!(
                "asked for {} embeddings, got {}",
                texts.len(),
                data.len()
            )));
        }
        let mut rows: Vec<(usize, EmbeddingVector)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item["index"].as_u64().map_or(pos, |i| i as usize);
            let values = item["embedding"]
                .as_array()
                .ok_or_else(|| BackendError::Protocol("item without embedding".into()))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| BackendError::Protocol("non-numeric embedding".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((index, EmbeddingVector::dense(&values)));
        }
        rows.sort_by_key(|(i, _)| *i);
        let vectors: Vec<EmbeddingVector> = rows.into_iter().map(|(_, v)| v).collect();
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.dim() != first.dim()) {
                return Err(BackendError::Protocol("embeddings of mixed dimension".into()));
            }
        }
        Ok(vectors)
    }
}

impl Translator for RemoteTranslator {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        if text.trim().is_empty() {
            return Err(BackendError::EmptyText);
        }
        self.call(&[text.to_string()])?
            .pop()
            .ok_or_else(|| BackendError::Protocol("no embedding returned".into()))
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch) {
            out.extend(self.call(chunk)?);
        }
        Ok(out)
    }

    fn name(&self) -> &str {
        "remote"
    }
}
