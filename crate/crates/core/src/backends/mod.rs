//! Planner and translator backends and fact projection.
//!
//! A [`Planner`] proposes free-text next steps for a prompt; a [`Translator`]
//! embeds text so candidates can be projected onto KB facts by cosine
//! similarity. Local backends are deterministic; remote ones speak the usual
//! completions and embeddings wire shapes and can be recorded to and replayed
//! from fixture files.

mod embedding;
mod exact;
mod fixture;
mod hash;
mod project;
mod remote;
mod scripted;
mod spec;
mod template;

use std::sync::Arc;

pub use embedding::{cosine, EmbeddingVector};
pub use exact::ExactTranslator;
pub use fixture::{
    plan_request_key, FixtureStore, RecordingPlanner, RecordingTranslator, ReplayPlanner,
    ReplayTranslator,
};
pub use hash::{hash_embed, HashTranslator, DEFAULT_HASH_DIM};
pub use project::{normalize_candidate, project, project_indexed, FactIndex, ProjectionResult};
pub use remote::{RemoteConfig, RemotePlanner, RemoteTranslator, RetryPolicy};
pub use scripted::OraclePlanner;
pub use spec::{BackendSpec, PlannerKind, TranslatorKind};
pub use template::{TemplatePlanner, PLACEHOLDER};

use crate::kb::{EntityId, Triple};
use crate::oracle::AbstractRule;

/// Candidates sampled per step.
pub const DEFAULT_CANDIDATES: usize = 10;
/// Sampling temperature sent to generative backends.
pub const DEFAULT_TEMPERATURE: f64 = 0.8;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(u64, u64),
    #[error("zero vector")]
    ZeroVector,
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("hash embedding dimension {0} is below 64")]
    DimensionTooSmall(u64),
    #[error("no facts to project onto")]
    EmptySlice,
    #[error("no candidates to project")]
    NoCandidates,
    #[error("transport: {0}")]
    Transport(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("no recorded response for request {0}")]
    ReplayMiss(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

/// Prover-side context that travels with a prompt.
///
/// Remote planners only see the prompt text; local planners use the
/// structured state instead of re-parsing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptState {
    pub query: Triple,
    pub current: EntityId,
    /// 1-based index of the step being proposed.
    pub step: usize,
    /// Abstract rule of the first retrieved example, if any.
    pub rule: Option<AbstractRule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanRequest {
    pub prompt: String,
    pub state: PromptState,
}

pub trait Planner: Send + Sync {
    /// Returns exactly `n` candidate continuations.
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError>;

    fn name(&self) -> &str;
}

pub trait Translator: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError>;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }

    fn name(&self) -> &str;
}

impl<P: Planner + ?Sized> Planner for Arc<P> {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        (**self).propose(request, n, temperature, seed)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<T: Translator + ?Sized> Translator for Arc<T> {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        (**self).embed(text)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        (**self).embed_batch(texts)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Repeats `items` cyclically until there are exactly `n`.
pub(crate) fn pad_cyclic(mut items: Vec<String>, n: usize) -> Vec<String> {
    if items.is_empty() {
        return items;
    }
    let base = items.len();
    let mut i = 0;
    while items.len() < n {
        items.push(items[i % base].clone());
        i += 1;
    }
    items.truncate(n);
    items
}
