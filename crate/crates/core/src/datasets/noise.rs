use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triple};
use crate::util::rng;

use super::DatasetError;

/// Random distractor facts: `round(rate * base)` of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub rate: f64,
    pub base: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            rate: 0.0,
            base: 5000,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn count(&self) -> usize {
        (self.rate * self.base as f64).round() as usize
    }
}

/// Adds `cfg.count()` facts drawn uniformly from entities x relations x
/// entities of `kb`, skipping self-loops, existing facts and `protected`.
pub fn inject_noise(
    kb: &KnowledgeBase,
    cfg: &NoiseConfig,
    protected: &HashSet<Triple>,
) -> Result<KnowledgeBase, DatasetError> {
    if !(0.0..=1.0).contains(&cfg.rate) {
        return Err(DatasetError::InvalidRate(cfg.rate));
    }
    let wanted = cfg.count();
    let mut out = kb.clone();
    if wanted == 0 {
        return Ok(out);
    }
    let entities: Vec<EntityId> = kb.entities().iter().copied().collect();
    let relations: Vec<RelationId> = kb.relations().iter().copied().collect();
    let (e, r) = (entities.len() as u128, relations.len() as u128);
    let blocked = kb
        .facts()
        .iter()
        .chain(protected.iter().filter(|t| !kb.contains(t)))
        .filter(|t| {
            t.subject != t.object
                && kb.entities().contains(&t.subject)
                && kb.entities().contains(&t.object)
                && kb.relations().contains(&t.relation)
        })
        .count() as u128;
    let capacity = (e * e.saturating_sub(1) * r).saturating_sub(blocked);
    if (wanted as u128) > capacity {
        return Err(DatasetError::VocabTooSmall {
            requested: wanted,
            capacity,
        });
    }
    let mut r = rng(cfg.seed);
    let mut added = 0;
    if (wanted as u128) * 2 > capacity {
        let mut pool: Vec<Triple> = Vec::new();
        for &s in &entities {
            for &p in &relations {
                for &o in &entities {
                    let t = Triple::new(s, p, o);
                    if s != o && !kb.contains(&t) && !protected.contains(&t) {
                        pool.push(t);
                    }
                }
            }
        }
        for t in rand::seq::index::sample(&mut r, pool.len(), wanted).into_iter().map(|i| pool[i]) {
            out.insert(t);
        }
        return Ok(out);
    }
    while added < wanted {
        let s = entities[r.gen_range(0..entities.len())];
        let p = relations[r.gen_range(0..relations.len())];
        let o = entities[r.gen_range(0..entities.len())];
        let t = Triple::new(s, p, o);
        if s == o || protected.contains(&t) {
            continue;
        }
        if out.insert(t) {
            added += 1;
        }
    }
    Ok(out)
}
