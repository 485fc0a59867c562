use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triple};
use crate::oracle::CompositionTable;
use crate::util::{derive_seed, rng};

use super::family::{generate_family_graph, FamilyGraph, Gender};
use super::names::NameSource;
use super::DatasetError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClutrrConfig {
    pub lengths: Vec<usize>,
    pub per_length: usize,
    pub seed: u64,
    /// People per generated family.
    pub family_size: usize,
    /// Families tried per instance before giving up.
    pub max_attempts: usize,
    /// Search nodes expanded per family.
    pub search_budget: usize,
}

impl Default for ClutrrConfig {
    fn default() -> Self {
        Self {
            lengths: (2..=10).collect(),
            per_length: 50,
            seed: 7,
            family_size: 24,
            max_attempts: 200,
            search_budget: 20_000,
        }
    }
}

/// One benchmark item: a query and the chain of facts that proves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub length: usize,
    pub query: Triple,
    /// The proof chain, in order; these are the instance's only facts.
    pub facts: Vec<Triple>,
    pub genders: BTreeMap<EntityId, Gender>,
}

impl Instance {
    pub fn kb(&self) -> KnowledgeBase {
        self.facts.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClutrrSplit {
    pub by_length: BTreeMap<usize, Vec<Instance>>,
}

impl ClutrrSplit {
    /// Instances of lengths 2 to 4, the source of the rule library.
    pub fn rules_corpus(&self) -> impl Iterator<Item = &Instance> {
        self.by_length.range(2..=4).flat_map(|(_, v)| v)
    }

    /// Instances of lengths 5 and up, keyed by length.
    pub fn query_splits(&self) -> impl Iterator<Item = (usize, &[Instance])> {
        self.by_length.range(5..).map(|(&l, v)| (l, v.as_slice()))
    }

    /// Facts of every instance of lengths 2 to 4.
    pub fn pooled_rule_facts(&self) -> Vec<Triple> {
        self.rules_corpus().flat_map(|i| i.facts.iter().copied()).collect()
    }
}

struct Search<'a> {
    graph: &'a FamilyGraph,
    table: &'a CompositionTable,
    index: HashMap<EntityId, usize>,
    length: usize,
    budget: usize,
}

impl Search<'_> {
    /// Extends `path` (facts) so that every prefix composes to the true relation.
    fn extend(
        &mut self,
        start: usize,
        path: &mut Vec<Triple>,
        fold: Option<RelationId>,
        r: &mut ChaCha8Rng,
    ) -> bool {
        if path.len() == self.length {
            return true;
        }
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        let current = path.last().map_or(self.graph.people[start].name, |f| f.object);
        let mut next = self.graph.facts.facts_with_subject(current);
        next.shuffle(r);
        for fact in next {
            let target = self.index[&fact.object];
            if target == start || path.iter().any(|f| f.object == fact.object) {
                continue;
            }
            let composed = match fold {
                None => Some(fact.relation),
                Some(acc) => self.table.get(acc, fact.relation),
            };
            let Some(composed) = composed else { continue };
            if self.graph.relation_between(start, target) != Some(composed.as_str()) {
                continue;
            }
            path.push(fact);
            if self.extend(start, path, Some(composed), r) {
                return true;
            }
            path.pop();
        }
        false
    }
}

fn find_chain(
    graph: &FamilyGraph,
    table: &CompositionTable,
    length: usize,
    budget: usize,
    r: &mut ChaCha8Rng,
) -> Option<(Triple, Vec<Triple>)> {
    let mut search = Search {
        graph,
        table,
        index: graph.people.iter().enumerate().map(|(i, p)| (p.name, i)).collect(),
        length,
        budget,
    };
    let mut starts: Vec<usize> = (0..graph.len()).collect();
    starts.shuffle(r);
    for start in starts {
        let mut path = Vec::with_capacity(length);
        if search.extend(start, &mut path, None, r) {
            let end = search.index[&path.last()?.object];
            let relation = graph.relation_between(start, end)?;
            let query = Triple::new(
                graph.people[start].name,
                RelationId::new(relation).ok()?,
                graph.people[end].name,
            );
            return Some((query, path));
        }
        if search.budget == 0 {
            break;
        }
    }
    None
}

struct Raw {
    length: usize,
    index: usize,
    query: Triple,
    facts: Vec<Triple>,
    genders: HashMap<EntityId, Gender>,
}

fn generate_instance(
    cfg: &ClutrrConfig,
    table: &CompositionTable,
    length: usize,
    index: usize,
) -> Result<Raw, DatasetError> {
    for attempt in 0..cfg.max_attempts {
        let seed = derive_seed(cfg.seed, &[length as u64, index as u64, attempt as u64]);
        let graph = generate_family_graph(cfg.family_size, seed)?;
        let mut r = rng(derive_seed(seed, &[0x5eed]));
        if let Some((query, facts)) = find_chain(&graph, table, length, cfg.search_budget, &mut r) {
            let genders = graph.people.iter().map(|p| (p.name, p.gender)).collect();
            return Ok(Raw {
                length,
                index,
                query,
                facts,
                genders,
            });
        }
    }
    Err(DatasetError::CompositionUndefined {
        length,
        attempts: cfg.max_attempts,
    })
}

/// Generates `per_length` chain instances for every requested length.
///
/// Each instance comes from its own family, and entities are renamed so that
/// names are unique across the whole split.
pub fn build_clutrr_split(
    cfg: &ClutrrConfig,
    table: &CompositionTable,
) -> Result<ClutrrSplit, DatasetError> {
    if let Some(&bad) = cfg.lengths.iter().find(|l| !(2..=10).contains(*l)) {
        return Err(DatasetError::InvalidLength(bad));
    }
    let mut lengths = cfg.lengths.clone();
    lengths.sort_unstable();
    lengths.dedup();
    let jobs: Vec<(usize, usize)> = lengths
        .iter()
        .flat_map(|&l| (0..cfg.per_length).map(move |i| (l, i)))
        .collect();
    let raws: Vec<Raw> = jobs
        .par_iter()
        .map(|&(l, i)| generate_instance(cfg, table, l, i))
        .collect::<Result<_, _>>()?;

    let mut names = NameSource::default();
    let mut split = ClutrrSplit::default();
    for l in &lengths {
        split.by_length.insert(*l, Vec::new());
    }
    for raw in raws {
        let mut rename: HashMap<EntityId, EntityId> = HashMap::new();
        let mut genders = BTreeMap::new();
        let entities = std::iter::once(raw.query.subject).chain(raw.facts.iter().map(|f| f.object));
        for e in entities {
            let gender = raw.genders[&e];
            let fresh = EntityId::new(&names.next(gender))?;
            rename.insert(e, fresh);
            genders.insert(fresh, gender);
        }
        let map = |t: &Triple| Triple::new(rename[&t.subject], t.relation, rename[&t.object]);
        split
            .by_length
            .get_mut(&raw.length)
            .expect("length registered")
            .push(Instance {
                id: format!("l{}-{:03}", raw.length, raw.index),
                length: raw.length,
                query: map(&raw.query),
                facts: raw.facts.iter().map(map).collect(),
                genders,
            });
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::kinship_composition;
    use crate::oracle::compose_path;

    #[test]
    fn chains_compose_to_their_queries() {
        let table = kinship_composition();
        let cfg = ClutrrConfig {
            lengths: vec![2, 5, 10],
            per_length: 5,
            ..ClutrrConfig::default()
        };
        let split = build_clutrr_split(&cfg, &table).unwrap();
        for (l, instances) in &split.by_length {
            assert_eq!(instances.len(), 5);
            for inst in instances {
                assert_eq!(inst.facts.len(), *l);
                assert_eq!(compose_path(&inst.facts, &table).unwrap(), Some(inst.query.relation));
                assert_eq!(inst.facts[0].subject, inst.query.subject);
                assert_eq!(inst.facts.last().unwrap().object, inst.query.object);
                assert!(!inst.facts.contains(&inst.query));
            }
        }
        assert_eq!(split.rules_corpus().count(), 5);
        assert_eq!(split.query_splits().count(), 2);
    }

    #[test]
    fn rejects_bad_lengths() {
        let cfg = ClutrrConfig {
            lengths: vec![1],
            ..ClutrrConfig::default()
        };
        assert!(matches!(
            build_clutrr_split(&cfg, &kinship_composition()),
            Err(DatasetError::InvalidLength(1))
        ));
    }
}
