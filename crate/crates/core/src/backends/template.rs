use rand::seq::SliceRandom;

use crate::kb::{RelationId, VerbalizationSchema};
use crate::util::{derive_seed, rng, text_seed};

use super::{pad_cyclic, BackendError, PlanRequest, Planner};

/// Object token emitted where a generative model would name an entity.
pub const PLACEHOLDER: &str = "?ENT";

/// Deterministic planner that imitates the retrieved abstract rule.
///
/// While the prompt's rule has a body atom for the current step, every
/// candidate renders that atom with the current entity as subject, the way a
/// sampled model concentrates on the demonstrated pattern. Once the rule is
/// exhausted (or absent) the candidates cycle through the schema relations in
/// a seeded order.
#[derive(Debug, Clone)]
pub struct TemplatePlanner {
    schema: VerbalizationSchema,
}

impl TemplatePlanner {
    pub fn new(schema: VerbalizationSchema) -> Self {
        Self { schema }
    }

    fn render(&self, subject: &str, relation: RelationId) -> Result<String, BackendError> {
        self.schema
            .render(subject, relation, PLACEHOLDER)
            .map_err(|e| BackendError::Protocol(e.to_string()))
    }
}

impl Planner for TemplatePlanner {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        _temperature: f64,
        seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        let state = &request.state;
        let current = state.current.as_str();
        let lead = state
            .rule
            .as_ref()
            .and_then(|r| r.body.get(state.step.checked_sub(1)?))
            .map(|atom| atom.relation)
            .filter(|r| self.schema.contains(*r));
        if let Some(lead) = lead {
            return Ok(vec![self.render(current, lead)?; n]);
        }
        log::debug!("rule exhausted at step {}; vocabulary candidates only", state.step);
        let mut relations: Vec<RelationId> = self.schema.relations().collect();
        let order_seed = derive_seed(seed, &[text_seed(current), state.step as u64]);
        relations.shuffle(&mut rng(order_seed));
        let candidates = relations
            .into_iter()
            .map(|r| self.render(current, r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(pad_cyclic(candidates, n))
    }

    fn name(&self) -> &str {
        "template"
    }
}
