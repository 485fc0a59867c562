//! Example retrieval, prompt construction, the generate-project-append proof
//! loop and K-prompt ensembling.

mod ensemble;
mod prompt;
mod prove;
mod retrieve;
mod spec;

pub use ensemble::{ensemble_prove, is_success, prompt_seed, EnsembleResult};
pub use prompt::{abstract_block, build_prompt, grounded_block, task_line};
pub use prove::{prove, prove_with_examples, ProofTrace, ProverContext, TraceStatus, TraceStep};
pub use retrieve::{retrieve_examples, ExampleOrder};
pub use spec::{PromptSpec, PromptVariant, RetrievalStrategy, SuccessCriterion};

use crate::backends::BackendError;
use crate::kb::{KbError, Triple};

/// A query `(s, p, o)`: prove that `o` is `s`'s `p`.
pub type Query = Triple;

#[derive(Debug, thiserror::Error)]
pub enum ProverError {
    #[error("backend failure: {0}")]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("invalid prompt spec: {0}")]
    InvalidSpec(String),
}
