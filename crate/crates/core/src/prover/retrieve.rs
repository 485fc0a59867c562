use rand::seq::SliceRandom;

use crate::backends::{cosine, Translator};
use crate::kb::VerbalizationSchema;
use crate::oracle::RuleLibrary;
use crate::util::{derive_seed, rng, text_seed};

use super::{PromptSpec, ProverError, Query, RetrievalStrategy};

/// Per-query ranking of library entries; prompt `j` takes the `j`-th run of
/// `n` entries (cyclically), so the first `k` prompts are the same for any
/// larger ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleOrder {
    pub order: Vec<usize>,
    pub n: usize,
}

impl ExampleOrder {
    pub fn selection(&self, prompt: usize) -> Vec<usize> {
        let len = self.order.len();
        (0..self.n.min(len))
            .map(|i| self.order[(prompt * self.n + i) % len])
            .collect()
    }
}

fn seeded_permutation(mut pool: Vec<usize>, spec: &PromptSpec, q: &Query) -> Vec<usize> {
    pool.shuffle(&mut rng(derive_seed(spec.seed, &[text_seed(&q.to_tsv())])));
    pool
}

fn all(lib: &RuleLibrary) -> Vec<usize> {
    (0..lib.len()).collect()
}

/// Orders the library for query `q` according to `spec.strategy`.
///
/// Relation- and entity-match fall back to random retrieval when no entry
/// matches. Task similarity ranks entries by cosine between the task lines
/// and needs a translator.
pub fn retrieve_examples(
    q: &Query,
    lib: &RuleLibrary,
    spec: &PromptSpec,
    translator: Option<&dyn Translator>,
    schema: &VerbalizationSchema,
) -> Result<ExampleOrder, ProverError> {
    let n = spec.n;
    if !spec.uses_examples() || lib.is_empty() {
        return Ok(ExampleOrder { order: Vec::new(), n });
    }
    let filtered = |pool: Vec<usize>, what: &str| {
        if pool.is_empty() {
            log::warn!("no example with matching {what} for {q}; using random examples");
            all(lib)
        } else {
            pool
        }
    };
    let order = match spec.strategy {
        RetrievalStrategy::RelationMatch | RetrievalStrategy::RuleOnly => {
            seeded_permutation(filtered(lib.for_relation(q.relation).to_vec(), "relation"), spec, q)
        }
        RetrievalStrategy::EntityMatch => {
            let pool = (0..lib.len())
                .filter(|&i| lib.get(i).example.task.subject == q.subject)
                .collect();
            seeded_permutation(filtered(pool, "subject"), spec, q)
        }
        RetrievalStrategy::Random => seeded_permutation(all(lib), spec, q),
        RetrievalStrategy::TaskSimilarity => {
            let translator = translator.ok_or_else(|| {
                ProverError::InvalidSpec("task-similarity retrieval needs a translator".into())
            })?;
            let target = translator.embed(&schema.verbalize(q)?)?;
            let mut scored = Vec::with_capacity(lib.len());
            for (i, entry) in lib.entries().iter().enumerate() {
                let v = translator.embed(&schema.verbalize(&entry.example.task)?)?;
                scored.push((cosine(&target, &v)?, i));
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            scored.into_iter().map(|(_, i)| i).collect()
        }
        RetrievalStrategy::None => Vec::new(),
    };
    Ok(ExampleOrder { order, n })
}
