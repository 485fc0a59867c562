use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kb::{io, Triple, VerbalizationSchema};
use crate::oracle::{extract_rule_library, CompositionTable};

use super::countries::{CountriesStructure, CountriesTask};
use super::{render_story, ClutrrConfig, ClutrrSplit, DatasetError, NoiseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Each bucket's KB holds only that bucket's instance facts.
    #[default]
    TestFacts,
    /// The pooled facts of lengths 2 to 4 are added as distractors.
    AllFacts,
}

/// Files of one evaluation bucket, relative to the manifest directory.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BucketFiles {
    pub name: String,
    /// Instance files (facts plus a query record), one per query.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<String>,
    /// Shared KB for all queries of the bucket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kb: Option<String>,
    /// TSV file of query triples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queries: Option<String>,
    /// Bucket-specific rule library; falls back to the split library.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub dataset: String,
    pub seed: u64,
    pub setting: Setting,
    pub lengths: Vec<usize>,
    pub counts: BTreeMap<String, usize>,
    pub noise: NoiseConfig,
    pub noise_sampling: String,
    pub schema: String,
    pub composition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled_facts: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub removal_scheme: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rejected: BTreeMap<String, Vec<String>>,
    pub buckets: Vec<BucketFiles>,
}

fn io_err(path: &Path, e: std::io::Error) -> DatasetError {
    DatasetError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), DatasetError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| io_err(path, e))?;
    write(path, &String::from_utf8(buf).expect("writers emit UTF-8"))
}

impl SplitManifest {
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        write(path, &(serde_json::to_string_pretty(self)? + "\n"))
    }

    /// Resolves a manifest-relative path against the manifest's directory.
    pub fn resolve(manifest_path: &Path, rel: &str) -> PathBuf {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(rel)
    }

    /// Writes a kinship split under `dir`: instance files, stories, the pooled
    /// rule-corpus facts, the rule library and the manifest.
    pub fn write_clutrr(
        dir: &Path,
        cfg: &ClutrrConfig,
        split: &ClutrrSplit,
        schema: &VerbalizationSchema,
        table: &CompositionTable,
    ) -> Result<Self, DatasetError> {
        write(&dir.join("schema.json"), &(schema.to_json() + "\n"))?;
        write(&dir.join("composition.json"), &(table.to_json() + "\n"))?;
        let mut buckets = Vec::new();
        let mut counts = BTreeMap::new();
        for (length, instances) in &split.by_length {
            let mut files = Vec::new();
            for inst in instances {
                let rel = format!("instances/l{length}/{}.jsonl", inst.id);
                write_with(&dir.join(&rel), |out| io::write_instance(&inst.query, &inst.facts, out))?;
                files.push(rel);
                let story = render_story(&inst.facts, &inst.genders, crate::util::text_seed(&inst.id) ^ cfg.seed);
                write(&dir.join(format!("stories/l{length}/{}.txt", inst.id)), &(story + "\n"))?;
            }
            counts.insert(format!("l{length}"), instances.len());
            counts.insert(
                format!("l{length}_facts"),
                instances.iter().map(|i| i.facts.len()).sum(),
            );
            buckets.push(BucketFiles {
                name: length.to_string(),
                instances: files,
                ..BucketFiles::default()
            });
        }
        let pooled = split.pooled_rule_facts();
        write_with(&dir.join("pooled_facts.tsv"), |out| io::write_tsv(&pooled, out))?;
        counts.insert("pooled_facts".into(), pooled.len());
        let train: Vec<_> = split.rules_corpus().map(|i| (i.query, i.kb())).collect();
        let library = extract_rule_library(&train, 4, schema);
        counts.insert("library_examples".into(), library.len());
        write_with(&dir.join("rules.jsonl"), |out| {
            library
                .write_json(out)
                .map_err(|e| std::io::Error::other(e.to_string()))
        })?;
        let manifest = SplitManifest {
            dataset: "clutrr".into(),
            seed: cfg.seed,
            setting: Setting::TestFacts,
            lengths: split.by_length.keys().copied().collect(),
            counts,
            noise: NoiseConfig::default(),
            noise_sampling: "vocab-uniform".into(),
            schema: "schema.json".into(),
            composition: "composition.json".into(),
            library: Some("rules.jsonl".into()),
            pooled_facts: Some("pooled_facts.tsv".into()),
            removal_scheme: BTreeMap::new(),
            rejected: BTreeMap::new(),
            buckets,
        };
        manifest.save(&dir.join("manifest.json"))?;
        Ok(manifest)
    }

    /// Writes countries tasks under `dir`, one bucket per task with its own
    /// train KB, test queries and rule library.
    pub fn write_countries(
        dir: &Path,
        raw: &crate::kb::KnowledgeBase,
        tasks: &[CountriesTask],
        seed: u64,
        schema: &VerbalizationSchema,
        table: &CompositionTable,
    ) -> Result<Self, DatasetError> {
        write(&dir.join("schema.json"), &(schema.to_json() + "\n"))?;
        write(&dir.join("composition.json"), &(table.to_json() + "\n"))?;
        let structure = CountriesStructure::from_kb(raw)?;
        let mut buckets = Vec::new();
        let mut counts = BTreeMap::new();
        let mut removal_scheme = BTreeMap::new();
        let mut rejected = BTreeMap::new();
        for task in tasks {
            let name = task.kind.to_string();
            let lower = name.to_lowercase();
            let kb_rel = format!("{lower}/train.tsv");
            let q_rel = format!("{lower}/test_queries.tsv");
            let lib_rel = format!("{lower}/rules.jsonl");
            write_with(&dir.join(&kb_rel), |out| io::write_tsv(task.train_kb.facts(), out))?;
            write_with(&dir.join(&q_rel), |out| io::write_tsv(&task.test_queries, out))?;
            let train: Vec<(Triple, crate::kb::KnowledgeBase)> = task
                .train_queries(&structure)
                .into_iter()
                .map(|q| (q, task.train_kb.clone()))
                .collect();
            let library = extract_rule_library(&train, 4, schema);
            write_with(&dir.join(&lib_rel), |out| {
                library
                    .write_json(out)
                    .map_err(|e| std::io::Error::other(e.to_string()))
            })?;
            counts.insert(format!("{name}_test_queries"), task.test_queries.len());
            counts.insert(format!("{name}_train_facts"), task.train_kb.len());
            counts.insert(format!("{name}_library_examples"), library.len());
            removal_scheme.insert(name.clone(), task.kind.removal_scheme().to_string());
            rejected.insert(
                name.clone(),
                task.rejected.iter().map(|e| e.as_str().to_string()).collect(),
            );
            buckets.push(BucketFiles {
                name,
                instances: Vec::new(),
                kb: Some(kb_rel),
                queries: Some(q_rel),
                library: Some(lib_rel),
            });
        }
        let manifest = SplitManifest {
            dataset: "countries".into(),
            seed,
            setting: Setting::TestFacts,
            lengths: Vec::new(),
            counts,
            noise: NoiseConfig::default(),
            noise_sampling: "vocab-uniform".into(),
            schema: "schema.json".into(),
            composition: "composition.json".into(),
            library: None,
            pooled_facts: None,
            removal_scheme,
            rejected,
            buckets,
        };
        manifest.save(&dir.join("manifest.json"))?;
        Ok(manifest)
    }
}
