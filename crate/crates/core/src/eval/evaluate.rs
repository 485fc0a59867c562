use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::backends::{FactIndex, FixtureStore, OraclePlanner, PlannerKind, Planner, Translator};
use crate::datasets::{inject_noise, Setting, SplitManifest};
use crate::kb::{io, KnowledgeBase, Triple, VerbalizationSchema};
use crate::oracle::{find_ground_paths, CompositionTable, RuleLibrary};
use crate::prover::{ensemble_prove, ProverContext};
use crate::util::{derive_seed, text_seed};

use super::report::{build_rows, BucketSummary};
use super::{EvalError, MetricsReport, PromptVerdict, QueryRecord, RunConfig};

/// Longest ground path searched when a KB bucket needs gold proofs.
const GOLD_MAX_LEN: usize = 4;

/// A loaded evaluation bucket, before noise.
#[derive(Debug, Clone)]
pub struct Bucket {
    pub name: String,
    pub kb: KnowledgeBase,
    pub queries: Vec<Triple>,
    pub library: RuleLibrary,
    /// Shortest ground proof per query, when one exists.
    pub gold: Vec<Option<Vec<Triple>>>,
}

/// Where the planner and translator come from.
#[derive(Clone, Default)]
pub enum EvalBackends {
    #[default]
    FromSpec,
    /// Wraps the configured backends so every call is recorded into the store.
    Recording(Arc<FixtureStore>),
}

fn shortest_path(kb: &KnowledgeBase, q: &Triple, max_len: usize) -> Option<Vec<Triple>> {
    let kb = kb.without([q]);
    find_ground_paths(&kb, q.subject, q.object, max_len)
        .into_iter()
        .min_by_key(|p| p.len())
}

/// Loads the manifest's buckets (filtered by `cfg.buckets`) under the effective setting.
pub fn load_buckets(
    cfg: &RunConfig,
    manifest: &SplitManifest,
) -> Result<Vec<Bucket>, EvalError> {
    let path = &cfg.split;
    let setting = cfg.setting.unwrap_or(manifest.setting);
    let pooled = match setting {
        Setting::TestFacts => None,
        Setting::AllFacts => {
            let rel = manifest.pooled_facts.as_deref().ok_or_else(|| {
                EvalError::Config("all-facts setting needs a split with pooled facts".into())
            })?;
            Some(io::load_facts(&SplitManifest::resolve(path, rel))?)
        }
    };
    let shared_library = match &manifest.library {
        Some(rel) => RuleLibrary::load(&SplitManifest::resolve(path, rel))?,
        None => RuleLibrary::new(),
    };
    if let Some(wanted) = &cfg.buckets {
        for name in wanted {
            if !manifest.buckets.iter().any(|b| &b.name == name) {
                return Err(EvalError::Config(format!("split has no bucket {name:?}")));
            }
        }
    }
    let mut out = Vec::new();
    for files in &manifest.buckets {
        if cfg.buckets.as_ref().is_some_and(|w| !w.contains(&files.name)) {
            continue;
        }
        let mut kb = KnowledgeBase::new();
        let mut queries = Vec::new();
        let mut gold = Vec::new();
        for rel in &files.instances {
            let (query, facts) = io::load_instance(&SplitManifest::resolve(path, rel))?;
            let query = query.ok_or_else(|| EvalError::Config(format!("instance {rel} has no query")))?;
            gold.push(shortest_path(&facts, &query, facts.len()));
            kb.extend(facts.facts().iter().copied());
            queries.push(query);
        }
        if let Some(rel) = &files.kb {
            kb.extend(io::load_facts(&SplitManifest::resolve(path, rel))?.facts().iter().copied());
        }
        if let Some(rel) = &files.queries {
            let listed = io::load_facts(&SplitManifest::resolve(path, rel))?;
            for q in listed.facts() {
                gold.push(shortest_path(&kb, q, GOLD_MAX_LEN));
                queries.push(*q);
            }
        }
        if let Some(extra) = &pooled {
            kb.extend(extra.facts().iter().copied());
        }
        let library = match &files.library {
            Some(rel) => RuleLibrary::load(&SplitManifest::resolve(path, rel))?,
            None => shared_library.clone(),
        };
        out.push(Bucket {
            name: files.name.clone(),
            kb,
            queries,
            library,
            gold,
        });
    }
    Ok(out)
}

pub fn evaluate(cfg: &RunConfig) -> Result<MetricsReport, EvalError> {
    evaluate_with(cfg, &EvalBackends::FromSpec)
}

pub fn evaluate_with(cfg: &RunConfig, backends: &EvalBackends) -> Result<MetricsReport, EvalError> {
    cfg.validate()?;
    let started = Instant::now();
    let manifest = SplitManifest::load(&cfg.split)?;
    let schema = VerbalizationSchema::load(&SplitManifest::resolve(&cfg.split, &manifest.schema))?;
    let table = CompositionTable::load(&SplitManifest::resolve(&cfg.split, &manifest.composition))?;
    let buckets = load_buckets(cfg, &manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;
    let mut spec = cfg.prompt.clone();
    spec.k = cfg.max_k();

    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for bucket in &buckets {
        let protected: HashSet<Triple> = bucket.queries.iter().copied().collect();
        let mut noise = cfg.noise;
        noise.seed = derive_seed(cfg.noise.seed, &[text_seed(&bucket.name)]);
        let kb = inject_noise(&bucket.kb, &noise, &protected)?;
        let injected = kb.len() - bucket.kb.len();

        let oracle = (cfg.backend.planner == PlannerKind::Oracle).then(|| {
            OraclePlanner::with_proofs(
                schema.clone(),
                bucket
                    .queries
                    .iter()
                    .zip(&bucket.gold)
                    .filter_map(|(q, g)| g.clone().map(|g| (*q, g))),
            )
        });
        let (planner, translator): (Arc<dyn Planner>, Arc<dyn Translator>) = match backends {
            EvalBackends::FromSpec => (cfg.backend.planner(&schema, oracle)?, cfg.backend.translator()?),
            EvalBackends::Recording(store) => cfg.backend.recording(&schema, oracle, store.clone())?,
        };
        let index = FactIndex::build(&kb, &schema, translator.as_ref())?;
        let ctx = ProverContext {
            kb: &kb,
            index: &index,
            library: &bucket.library,
            schema: &schema,
            table: &table,
            planner: planner.as_ref(),
            translator: translator.as_ref(),
        };
        info!(
            "bucket {}: {} queries, {} facts ({} injected)",
            bucket.name,
            bucket.queries.len(),
            kb.len(),
            injected
        );
        let run = |(i, q): (usize, &Triple)| {
            let start = Instant::now();
            let result = ensemble_prove(q, &ctx, &spec, cfg.success);
            let elapsed_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1000.0);
            let (prompts, error) = match result {
                Ok(r) => (
                    r.per_prompt
                        .iter()
                        .map(|t| PromptVerdict {
                            reach: t.reach,
                            verified: t.verified,
                            steps: t.steps.len(),
                            status: t.status,
                        })
                        .collect(),
                    None,
                ),
                Err(e) => {
                    warn!("bucket {} query {} ({}): {e}", bucket.name, i, q.to_tsv());
                    (Vec::new(), Some(e.to_string()))
                }
            };
            QueryRecord {
                bucket: bucket.name.clone(),
                index: i,
                query: *q,
                prompts,
                error,
                elapsed_ms,
            }
        };
        let bucket_records: Vec<QueryRecord> =
            pool.install(|| bucket.queries.par_iter().enumerate().map(run).collect());
        records.extend(bucket_records);
        summaries.push(BucketSummary {
            name: bucket.name.clone(),
            queries: bucket.queries.len(),
            kb_facts: kb.len(),
            injected_facts: injected,
        });
    }
    let rows = build_rows(cfg, &summaries, &records);
    Ok(MetricsReport {
        config: cfg.clone(),
        rows,
        buckets: summaries,
        queries: records,
        total_ms: cfg.timing.then(|| started.elapsed().as_secs_f64() * 1000.0),
    })
}
