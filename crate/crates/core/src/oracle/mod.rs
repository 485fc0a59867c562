//! Symbolic ground truth: unification, backward chaining, exhaustive path
//! search, relation composition and trace verification.

mod chain;
mod compose;
mod paths;
mod rules;
mod term;
mod verify;

pub use chain::{backward_chain, shortest_proof, Proof};
pub use compose::{compose_path, CompositionTable};
pub use paths::find_ground_paths;
pub use rules::{
    abstract_example, bindings_for, extract_rule_library, RuleEntry, RuleExample, RuleLibrary,
};
pub use term::{unify, AbstractRule, Atom, Bindings, HornRule, Term};
pub use verify::{verify_trace, Verdict};

use crate::kb::KbError;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("not a chain rule: {0}")]
    NotAChainRule(String),
    #[error("cannot parse rule {0:?}")]
    RuleSyntax(String),
    #[error("chain broken between step {0} and step {next}", next = .0 + 1)]
    ChainBroken(usize),
    #[error("empty proof")]
    EmptyProof,
    #[error("composition table maps ({0}, {1}) to both {2} and {3}")]
    CompositionConflict(String, String, String, String),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(String),
}
