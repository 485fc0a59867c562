use std::collections::HashMap;

use crate::kb::{Triple, VerbalizationSchema};

use super::{BackendError, PlanRequest, Planner};

/// Replays known proofs: at step `i` every candidate is the rendering of
/// step `i` of the stored proof for the request's query.
#[derive(Debug, Clone)]
pub struct OraclePlanner {
    schema: VerbalizationSchema,
    proofs: HashMap<Triple, Vec<Triple>>,
}

impl OraclePlanner {
    pub fn new(schema: VerbalizationSchema) -> Self {
        Self {
            schema,
            proofs: HashMap::new(),
        }
    }

    pub fn insert(&mut self, query: Triple, steps: Vec<Triple>) {
        self.proofs.insert(query, steps);
    }

    pub fn with_proofs<I: IntoIterator<Item = (Triple, Vec<Triple>)>>(
        schema: VerbalizationSchema,
        proofs: I,
    ) -> Self {
        Self {
            schema,
            proofs: proofs.into_iter().collect(),
        }
    }
}

impl Planner for OraclePlanner {
    fn propose(
        &self,
        request: &PlanRequest,
        n: usize,
        _temperature: f64,
        _seed: u64,
    ) -> Result<Vec<String>, BackendError> {
        let query = request.state.query;
        let steps = self
            .proofs
            .get(&query)
            .ok_or_else(|| BackendError::ReplayMiss(format!("no oracle proof for {query}")))?;
        let step = request
            .state
            .step
            .checked_sub(1)
            .and_then(|i| steps.get(i))
            .or(steps.last())
            .ok_or_else(|| BackendError::ReplayMiss(format!("empty oracle proof for {query}")))?;
        let text = self
            .schema
            .verbalize(step)
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(vec![text; n])
    }

    fn name(&self) -> &str {
        "oracle"
    }
}
