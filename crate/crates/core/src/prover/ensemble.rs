use serde::{Deserialize, Serialize};

use crate::util::{derive_seed, text_seed};

use super::{
    prove_with_examples, retrieve_examples, PromptSpec, ProofTrace, ProverContext, ProverError,
    Query, SuccessCriterion,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub per_prompt: Vec<ProofTrace>,
    pub success_any: bool,
    pub first_success_index: Option<usize>,
}

impl EnsembleResult {
    /// Success using only the first `k` prompts.
    pub fn success_at(&self, k: usize) -> bool {
        self.first_success_index.is_some_and(|i| i < k)
    }
}

pub fn prompt_seed(spec: &PromptSpec, q: &Query, prompt: usize) -> u64 {
    derive_seed(spec.seed, &[prompt as u64, text_seed(&q.to_tsv())])
}

pub fn is_success(trace: &ProofTrace, criterion: SuccessCriterion) -> bool {
    match criterion {
        SuccessCriterion::Reach => trace.reach,
        SuccessCriterion::Verified => trace.verified,
    }
}

/// Runs up to `spec.k` prompts; prompt `j` uses selection `j` of one seeded
/// example order.
pub fn ensemble_prove(
    q: &Query,
    ctx: &ProverContext<'_>,
    spec: &PromptSpec,
    criterion: SuccessCriterion,
) -> Result<EnsembleResult, ProverError> {
    spec.validate()?;
    let order = retrieve_examples(q, ctx.library, spec, Some(ctx.translator), ctx.schema)?;
    let mut per_prompt = Vec::with_capacity(spec.k);
    let mut first_success_index = None;
    for j in 0..spec.k {
        let trace = prove_with_examples(q, ctx, spec, &order.selection(j), prompt_seed(spec, q, j))?;
        let ok = is_success(&trace, criterion);
        per_prompt.push(trace);
        if ok && first_success_index.is_none() {
            first_success_index = Some(j);
            if spec.short_circuit {
                break;
            }
        }
    }
    Ok(EnsembleResult {
        success_any: first_success_index.is_some(),
        per_prompt,
        first_success_index,
    })
}
