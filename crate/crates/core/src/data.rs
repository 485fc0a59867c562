//! Bundled data files: schemas, composition tables and the countries mini KB.

use crate::kb::{io, KnowledgeBase, VerbalizationSchema};
use crate::oracle::CompositionTable;

pub const KINSHIP_SCHEMA_JSON: &str = include_str!("../data/kinship_schema.json");
pub const KINSHIP_COMPOSITION_JSON: &str = include_str!("../data/kinship_composition.json");
pub const COUNTRIES_SCHEMA_JSON: &str = include_str!("../data/countries_schema.json");
pub const COUNTRIES_COMPOSITION_JSON: &str = include_str!("../data/countries_composition.json");
pub const COUNTRIES_MINI_TSV: &str = include_str!("../data/countries_mini.tsv");

pub fn kinship_schema() -> VerbalizationSchema {
    VerbalizationSchema::from_json(KINSHIP_SCHEMA_JSON).expect("bundled kinship schema is valid")
}

pub fn kinship_composition() -> CompositionTable {
    CompositionTable::from_json(KINSHIP_COMPOSITION_JSON).expect("bundled kinship table is valid")
}

pub fn countries_schema() -> VerbalizationSchema {
    VerbalizationSchema::from_json(COUNTRIES_SCHEMA_JSON).expect("bundled countries schema is valid")
}

pub fn countries_composition() -> CompositionTable {
    CompositionTable::from_json(COUNTRIES_COMPOSITION_JSON)
        .expect("bundled countries table is valid")
}

pub fn countries_mini() -> KnowledgeBase {
    io::read_facts(COUNTRIES_MINI_TSV.as_bytes()).expect("bundled countries KB is valid")
}
