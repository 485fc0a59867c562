//! Prompt-driven proof-path search over knowledge bases.
//!
//! A planner proposes candidate next steps as free text, a translator embeds
//! them and projects the best one onto a KB fact whose subject is the current
//! frontier entity, and the accepted fact is appended to the prompt until the
//! target entity is reached. A symbolic backward-chaining oracle supplies rule
//! libraries and verifies the resulting traces.
//!
//! - [`kb`]: interning, triples, verbalization schemas, the fact store.
//! - [`oracle`]: unification, backward chaining, path search, composition checks.
//! - [`backends`]: planner and translator interfaces with local, remote and
//!   record/replay implementations, plus fact projection.
//! - [`prover`]: example retrieval, prompt construction, the proof loop, ensembling.
//! - [`datasets`]: synthetic kinship and countries benchmarks, noise, stories.
//! - [`eval`]: metrics, sweeps and report emission.

pub mod backends;
pub mod data;
pub mod datasets;
pub mod eval;
pub mod kb;
pub mod oracle;
pub mod prover;
pub mod util;

pub use kb::{EntityId, KnowledgeBase, RelationId, Triple, VerbalizationSchema};
