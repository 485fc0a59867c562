//! Synthetic benchmark curation: kinship chains of controlled length,
//! countries S1/S2/S3 tasks, noise injection and story rendering.

mod clutrr;
mod countries;
mod family;
mod manifest;
mod names;
mod noise;
mod story;

pub use clutrr::{build_clutrr_split, ClutrrConfig, ClutrrSplit, Instance};
pub use countries::{
    build_countries_tasks, countries_rules, CountriesStructure, CountriesTask, CountriesTaskKind,
};
pub use family::{generate_family_graph, FamilyGraph, Gender, Person};
pub use manifest::{BucketFiles, Setting, SplitManifest};
pub use noise::{inject_noise, NoiseConfig};
pub use story::{parse_story, render_story};

use crate::kb::KbError;
use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("a family needs at least 4 people, got {0}")]
    InfeasibleSize(usize),
    #[error("length {0} is outside 2..=10")]
    InvalidLength(usize),
    #[error("no chain of length {length} with a defined composition after {attempts} attempts")]
    CompositionUndefined { length: usize, attempts: usize },
    #[error("cannot add {requested} noise facts: only {capacity} distinct candidates")]
    VocabTooSmall { requested: usize, capacity: u128 },
    #[error("noise rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("countries KB lacks {0}")]
    MissingStructure(String),
    #[error("only {found} of {wanted} test countries are provable")]
    UnprovableTestQuery { wanted: usize, found: usize },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(String),
}
