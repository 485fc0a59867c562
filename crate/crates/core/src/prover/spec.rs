use serde::{Deserialize, Serialize};

use crate::backends::{DEFAULT_CANDIDATES, DEFAULT_TEMPERATURE};

use super::ProverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetrievalStrategy {
    RelationMatch,
    TaskSimilarity,
    EntityMatch,
    Random,
    None,
    /// Same retrieval as `relation-match`; pair it with the `only-rule` variant.
    RuleOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptVariant {
    Lmlp,
    LmlpReverse,
    OnlyRule,
    NoPrompt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuccessCriterion {
    #[default]
    Reach,
    Verified,
}

impl std::fmt::Display for RetrievalStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&kebab(self))
    }
}

impl std::fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&kebab(self))
    }
}

fn kebab<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit variants serialize as strings"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSpec {
    pub strategy: RetrievalStrategy,
    pub variant: PromptVariant,
    /// Examples per prompt.
    pub n: usize,
    /// Prompts per query.
    pub k: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub exclude_used_facts: bool,
    pub min_score: Option<f64>,
    /// Candidates sampled per step.
    pub candidates: usize,
    pub temperature: f64,
    /// Stop an ensemble at the first successful prompt.
    pub short_circuit: bool,
}

impl Default for PromptSpec {
    fn default() -> Self {
        Self {
            strategy: RetrievalStrategy::RelationMatch,
            variant: PromptVariant::Lmlp,
            n: 1,
            k: 1,
            max_steps: 20,
            seed: 0,
            exclude_used_facts: true,
            min_score: None,
            candidates: DEFAULT_CANDIDATES,
            temperature: DEFAULT_TEMPERATURE,
            short_circuit: true,
        }
    }
}

impl PromptSpec {
    pub fn validate(&self) -> Result<(), ProverError> {
        let bad = |m: &str| Err(ProverError::InvalidSpec(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if self.candidates == 0 {
            return bad("candidates must be at least 1");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be a non-negative number");
        }
        if self.min_score.is_some_and(|s| !s.is_finite()) {
            return bad("min_score must be finite");
        }
        Ok(())
    }

    /// Whether prompts carry retrieved examples at all.
    pub fn uses_examples(&self) -> bool {
        self.variant != PromptVariant::NoPrompt && self.strategy != RetrievalStrategy::None
    }
}
