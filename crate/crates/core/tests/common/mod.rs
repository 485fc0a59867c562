#![allow(dead_code)]

use std::path::{Path, PathBuf};

use kbreason::data;
use kbreason::datasets::{build_clutrr_split, ClutrrConfig, SplitManifest};
use kbreason::oracle::{RuleExample, RuleLibrary};
use kbreason::Triple;

pub fn t(s: &str, r: &str, o: &str) -> Triple {
    Triple::from_strs(s, r, o).unwrap()
}

pub fn sister_example() -> RuleExample {
    RuleExample {
        task: t("George", "sister", "Nancy"),
        steps: vec![t("George", "brother", "Dale"), t("Dale", "sister", "Nancy")],
    }
}

pub fn sister_library() -> RuleLibrary {
    let mut lib = RuleLibrary::new();
    lib.push(sister_example()).unwrap();
    lib
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Writes a kinship split under `dir` and returns the manifest path.
pub fn write_split(dir: &Path, lengths: Vec<usize>, per_length: usize, seed: u64) -> PathBuf {
    let cfg = ClutrrConfig {
        lengths,
        per_length,
        seed,
        ..ClutrrConfig::default()
    };
    let table = data::kinship_composition();
    let split = build_clutrr_split(&cfg, &table).unwrap();
    SplitManifest::write_clutrr(dir, &cfg, &split, &data::kinship_schema(), &table).unwrap();
    dir.join("manifest.json")
}
