use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kb::{chain_break, EntityId, KnowledgeBase, RelationId, Triple, VerbalizationSchema};

use super::paths::find_ground_paths;
use super::term::{AbstractRule, Atom, Bindings, HornRule, Term};
use super::OracleError;

/// A grounded proof demonstration: a task triple and the facts proving it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleExample {
    pub task: Triple,
    pub steps: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleEntry {
    pub example: RuleExample,
    pub rule: AbstractRule,
}

fn variable_name(index: usize) -> String {
    const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    match LETTERS.get(index) {
        Some(&c) => char::from(c).to_string(),
        None => format!("V{index}"),
    }
}

/// Replaces entities by `A, B, C, ...` in order of first appearance along the steps.
pub fn abstract_example(ex: &RuleExample) -> Result<AbstractRule, OracleError> {
    if ex.steps.is_empty() {
        return Err(OracleError::EmptyProof);
    }
    if let Some(i) = chain_break(&ex.steps) {
        return Err(OracleError::ChainBroken(i));
    }
    let mut names: HashMap<EntityId, String> = HashMap::new();
    let sequence = std::iter::once(ex.steps[0].subject).chain(ex.steps.iter().map(|s| s.object));
    for entity in sequence {
        let next = variable_name(names.len());
        names.entry(entity).or_insert(next);
    }
    let var = |e: EntityId| -> Term {
        names
            .get(&e)
            .map_or(Term::Const(e), |name| Term::Var(name.clone()))
    };
    let head = Atom::new(ex.task.relation, var(ex.task.subject), var(ex.task.object));
    let body = ex
        .steps
        .iter()
        .map(|s| Atom::new(s.relation, var(s.subject), var(s.object)))
        .collect();
    HornRule::new(head, body)
}

/// Rule examples with their abstractions, indexed by task relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleLibrary {
    entries: Vec<RuleEntry>,
    by_relation: BTreeMap<RelationId, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct AbstractRecord {
    head: String,
    body: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct LibraryRecord {
    task: String,
    steps: Vec<String>,
    #[serde(rename = "abstract")]
    rule: AbstractRecord,
}

impl RuleLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, example: RuleExample) -> Result<(), OracleError> {
        let rule = abstract_example(&example)?;
        self.push_entry(RuleEntry { example, rule });
        Ok(())
    }

    fn push_entry(&mut self, entry: RuleEntry) {
        self.by_relation
            .entry(entry.example.task.relation)
            .or_default()
            .push(self.entries.len());
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[RuleEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> &RuleEntry {
        &self.entries[index]
    }

    /// Indices of the entries whose task relation is `relation`.
    pub fn for_relation(&self, relation: RelationId) -> &[usize] {
        self.by_relation
            .get(&relation)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn relations(&self) -> impl Iterator<Item = RelationId> + '_ {
        self.by_relation.keys().copied()
    }

    /// Writes one JSON record per line.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), OracleError> {
        for entry in &self.entries {
            let record = LibraryRecord {
                task: entry.example.task.to_tsv(),
                steps: entry.example.steps.iter().map(Triple::to_tsv).collect(),
                rule: AbstractRecord {
                    head: entry.rule.head.encode(),
                    body: entry.rule.body.iter().map(Atom::encode).collect(),
                },
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")
                .map_err(|e| OracleError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_json<R: BufRead>(reader: R) -> Result<Self, OracleError> {
        let mut lib = Self::new();
        for line in reader.lines() {
            let line = line.map_err(|e| OracleError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LibraryRecord = serde_json::from_str(&line)?;
            let example = RuleExample {
                task: Triple::from_tsv(&record.task)?,
                steps: record
                    .steps
                    .iter()
                    .map(|s| Triple::from_tsv(s))
                    .collect::<Result<_, _>>()?,
            };
            let rule = HornRule::new(
                Atom::decode(&record.rule.head)?,
                record
                    .rule
                    .body
                    .iter()
                    .map(|a| Atom::decode(a))
                    .collect::<Result<_, _>>()?,
            )?;
            lib.push_entry(RuleEntry { example, rule });
        }
        Ok(lib)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let file = std::fs::File::open(path)
            .map_err(|e| OracleError::Io(format!("{}: {e}", path.display())))?;
        Self::read_json(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<(), OracleError> {
        let file = std::fs::File::create(path)
            .map_err(|e| OracleError::Io(format!("{}: {e}", path.display())))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_json(&mut out)?;
        out.flush().map_err(|e| OracleError::Io(e.to_string()))
    }
}

fn render_steps(steps: &[Triple], schema: &VerbalizationSchema) -> String {
    steps
        .iter()
        .map(|s| schema.verbalize(s).unwrap_or_else(|_| s.to_tsv()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Builds a library from training queries, one example per provable query.
///
/// Each query is proved by the shortest ground path of at most `max_len`
/// facts from its own KB with the query triple removed; ties go to the
/// lexicographically smallest rendering. Unprovable queries are skipped.
pub fn extract_rule_library(
    train: &[(Triple, KnowledgeBase)],
    max_len: usize,
    schema: &VerbalizationSchema,
) -> RuleLibrary {
    let mut lib = RuleLibrary::new();
    for (task, kb) in train {
        let kb = if kb.contains(task) {
            kb.without([task])
        } else {
            kb.clone()
        };
        let best = find_ground_paths(&kb, task.subject, task.object, max_len)
            .into_iter()
            .map(|p| (p.len(), render_steps(&p, schema), p))
            .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        let Some((_, _, steps)) = best else {
            log::warn!("no proof of {task} within {max_len} steps; skipped");
            continue;
        };
        if let Err(e) = lib.push(RuleExample { task: *task, steps }) {
            log::warn!("cannot abstract proof of {task}: {e}; skipped");
        }
    }
    lib
}

/// Re-grounds an abstract rule with the entity bindings of an example.
pub fn bindings_for(ex: &RuleExample, rule: &AbstractRule) -> Option<Bindings> {
    let mut bindings = Bindings::new();
    for (atom, step) in rule.body.iter().zip(&ex.steps) {
        bindings = super::term::unify(atom, step, &bindings)?;
    }
    Some(bindings)
}
