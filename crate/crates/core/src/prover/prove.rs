use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::backends::{
    project_indexed, BackendError, FactIndex, PlanRequest, Planner, PromptState, Translator,
};
use crate::kb::{KnowledgeBase, Triple, VerbalizationSchema};
use crate::oracle::{verify_trace, CompositionTable, RuleLibrary};
use crate::util::derive_seed;

use super::{build_prompt, retrieve_examples, PromptSpec, ProverError, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Reached,
    MaxSteps,
    EmptySlice,
    /// Best projection fell under `min_score`.
    BelowMinScore,
    /// Every candidate was blank.
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(flatten)]
    pub fact: Triple,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub query: Query,
    pub prompt: String,
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
    pub reach: bool,
    pub verified: bool,
}

impl ProofTrace {
    pub fn facts(&self) -> Vec<Triple> {
        self.steps.iter().map(|s| s.fact).collect()
    }
}

/// Everything a proof needs besides the query and the prompt spec.
#[derive(Clone, Copy)]
pub struct ProverContext<'a> {
    pub kb: &'a KnowledgeBase,
    pub index: &'a FactIndex,
    pub library: &'a RuleLibrary,
    pub schema: &'a VerbalizationSchema,
    pub table: &'a CompositionTable,
    pub planner: &'a dyn Planner,
    pub translator: &'a dyn Translator,
}

/// Runs the proof loop with the given library entries as prompt examples.
pub fn prove_with_examples(
    q: &Query,
    ctx: &ProverContext<'_>,
    spec: &PromptSpec,
    examples: &[usize],
    seed: u64,
) -> Result<ProofTrace, ProverError> {
    let entries: Vec<_> = examples.iter().map(|&i| ctx.library.get(i)).collect();
    let mut prompt = build_prompt(&entries, q, spec.variant, ctx.schema)?;
    let rule = entries.first().map(|e| e.rule.clone());
    let mut used: HashSet<usize> = HashSet::new();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut current = q.subject;
    let mut status = TraceStatus::MaxSteps;
    for step in 1..=spec.max_steps {
        let slice: Vec<usize> = ctx
            .kb
            .subject_fact_ids(current)
            .iter()
            .copied()
            .filter(|&id| ctx.kb.fact(id) != *q)
            .filter(|id| !(spec.exclude_used_facts && used.contains(id)))
            .collect();
        if slice.is_empty() {
            status = TraceStatus::EmptySlice;
            break;
        }
        let request = PlanRequest {
            prompt: prompt.clone(),
            state: PromptState {
                query: *q,
                current,
                step,
                rule: rule.clone(),
            },
        };
        let step_seed = derive_seed(seed, &[step as u64]);
        let candidates =
            ctx.planner
                .propose(&request, spec.candidates, spec.temperature, step_seed)?;
        let chosen = match project_indexed(&candidates, &slice, ctx.kb, ctx.index, ctx.translator) {
            Ok(p) => p,
            Err(BackendError::NoCandidates) => {
                status = TraceStatus::NoCandidates;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        if spec.min_score.is_some_and(|min| chosen.score < min) {
            status = TraceStatus::BelowMinScore;
            break;
        }
        let id = ctx.kb.position(&chosen.fact).expect("projected fact is in the KB");
        prompt.push_str(&format!("Step {step}: {}\n", ctx.index.rendering(id)));
        used.insert(id);
        steps.push(TraceStep {
            fact: chosen.fact,
            score: chosen.score,
        });
        current = chosen.fact.object;
        if current == q.object {
            status = TraceStatus::Reached;
            break;
        }
    }
    let facts: Vec<Triple> = steps.iter().map(|s| s.fact).collect();
    let verdict = verify_trace(&facts, q, ctx.table, ctx.kb);
    Ok(ProofTrace {
        query: *q,
        prompt,
        steps,
        status,
        reach: verdict.reach,
        verified: verdict.verified,
    })
}

/// Single-prompt proof: retrieval for prompt 0, then the proof loop.
pub fn prove(q: &Query, ctx: &ProverContext<'_>, spec: &PromptSpec) -> Result<ProofTrace, ProverError> {
    spec.validate()?;
    let order = retrieve_examples(q, ctx.library, spec, Some(ctx.translator), ctx.schema)?;
    prove_with_examples(q, ctx, spec, &order.selection(0), super::prompt_seed(spec, q, 0))
}
