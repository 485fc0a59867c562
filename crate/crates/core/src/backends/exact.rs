use std::collections::HashMap;
use std::sync::RwLock;

use super::{BackendError, EmbeddingVector, Translator};

/// Degenerate translator: one basis vector per distinct string.
///
/// Two texts have cosine 1 when they are byte-identical and 0 otherwise, so
/// projection degenerates to exact string lookup.
#[derive(Debug, Default)]
pub struct ExactTranslator {
    ids: RwLock<HashMap<String, u64>>,
}

impl ExactTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    fn id(&self, text: &str) -> u64 {
        if let Some(&id) = self.ids.read().expect("interner lock").get(text) {
            return id;
        }
        let mut ids = self.ids.write().expect("interner lock");
        let next = ids.len() as u64;
        *ids.entry(text.to_string()).or_insert(next)
    }
}

impl Translator for ExactTranslator {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        Ok(EmbeddingVector::from_pairs(u64::MAX, vec![(self.id(text), 1.0)]))
    }

    fn name(&self) -> &str {
        "exact"
    }
}
