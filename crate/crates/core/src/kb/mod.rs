//! Symbols, triples, verbalization schemas and the indexed fact store.

pub mod io;
mod schema;
mod store;
mod symbol;
mod triple;

use std::path::Path;

pub use schema::{SchemaStyle, VerbalizationSchema};
pub use store::KnowledgeBase;
pub use symbol::Symbol;
pub use triple::{chain_break, EntityId, RelationId, Triple};

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("empty {0} name")]
    EmptyName(&'static str),
    #[error("no template matches {0:?}")]
    UnparsableText(String),
    #[error("relation {0:?} is not in the schema")]
    UnknownRelation(String),
    #[error("bad template for {relation:?}: {template:?}")]
    BadTemplate { relation: String, template: String },
    #[error("schema has no relations")]
    EmptySchema,
    #[error("malformed record {0:?}")]
    MalformedRecord(String),
    #[error("query record in a plain fact file")]
    UnexpectedQuery,
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<KbError>,
    },
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl KbError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        KbError::Io(format!("{}: {err}", path.display()))
    }
}
