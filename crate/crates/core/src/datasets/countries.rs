use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triple};
use crate::oracle::{backward_chain, HornRule};
use crate::util::rng;

use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CountriesTaskKind {
    S1,
    S2,
    S3,
}

impl CountriesTaskKind {
    /// Longest proof, in steps, a test query may need.
    pub fn max_proof_len(self) -> usize {
        match self {
            CountriesTaskKind::S1 => 2,
            CountriesTaskKind::S2 => 3,
            CountriesTaskKind::S3 => 4,
        }
    }

    pub fn removal_scheme(self) -> &'static str {
        match self {
            CountriesTaskKind::S1 => "remove locatedIn(c, region) for each test country c",
            CountriesTaskKind::S2 => {
                "S1, plus remove locatedIn(c, subregion) for each test country c"
            }
            CountriesTaskKind::S3 => {
                "S2, plus remove locatedIn(n, region) for each neighbor n of a test country"
            }
        }
    }
}

impl std::fmt::Display for CountriesTaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for CountriesTaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Self::S1),
            "S2" => Ok(Self::S2),
            "S3" => Ok(Self::S3),
            _ => Err(format!("unknown countries task {s:?}")),
        }
    }
}

fn located_in() -> RelationId {
    RelationId::new("locatedIn").expect("non-empty")
}

fn neighbor_of() -> RelationId {
    RelationId::new("neighborOf").expect("non-empty")
}

/// `locatedIn` transitivity and its `neighborOf` variant.
pub fn countries_rules() -> Vec<HornRule> {
    [
        "locatedIn(A, C) :- locatedIn(A, B), locatedIn(B, C)",
        "locatedIn(A, C) :- neighborOf(A, B), locatedIn(B, C)",
    ]
    .iter()
    .map(|r| HornRule::parse(r).expect("bundled rules parse"))
    .collect()
}

/// Regions, subregions and countries recovered from the shape of the
/// `locatedIn` graph: regions have no outgoing `locatedIn`, countries are
/// never a `locatedIn` target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountriesStructure {
    pub regions: BTreeSet<EntityId>,
    pub subregion_of: BTreeMap<EntityId, EntityId>,
    pub region_of: BTreeMap<EntityId, EntityId>,
    pub neighbors: BTreeMap<EntityId, Vec<EntityId>>,
}

impl CountriesStructure {
    pub fn from_kb(kb: &KnowledgeBase) -> Result<Self, DatasetError> {
        let loc = located_in();
        let located: Vec<&Triple> = kb.facts().iter().filter(|f| f.relation == loc).collect();
        let has_parent: HashSet<EntityId> = located.iter().map(|f| f.subject).collect();
        let targets: HashSet<EntityId> = located.iter().map(|f| f.object).collect();
        let regions: BTreeSet<EntityId> = targets
            .iter()
            .filter(|e| !has_parent.contains(e))
            .copied()
            .collect();
        if regions.is_empty() {
            return Err(DatasetError::MissingStructure("regions".into()));
        }
        let subregions: BTreeSet<EntityId> = targets
            .iter()
            .filter(|e| !regions.contains(e))
            .copied()
            .collect();
        let mut sub_region: BTreeMap<EntityId, EntityId> = BTreeMap::new();
        for f in &located {
            if subregions.contains(&f.subject) && regions.contains(&f.object) {
                sub_region.insert(f.subject, f.object);
            }
        }
        let mut subregion_of = BTreeMap::new();
        let mut region_of = BTreeMap::new();
        for f in &located {
            if targets.contains(&f.subject) {
                continue;
            }
            if regions.contains(&f.object) {
                region_of.insert(f.subject, f.object);
            } else if subregions.contains(&f.object) {
                subregion_of.insert(f.subject, f.object);
            }
        }
        for (&c, s) in &subregion_of {
            if let Some(&r) = sub_region.get(s) {
                region_of.entry(c).or_insert(r);
            }
        }
        if region_of.is_empty() {
            return Err(DatasetError::MissingStructure("countries".into()));
        }
        let nb = neighbor_of();
        let mut neighbors: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
        for f in kb.facts().iter().filter(|f| f.relation == nb) {
            neighbors.entry(f.subject).or_default().push(f.object);
        }
        Ok(Self {
            regions,
            subregion_of,
            region_of,
            neighbors,
        })
    }

    pub fn countries(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.region_of.keys().copied()
    }

    fn removals(&self, kind: CountriesTaskKind, tests: &[EntityId]) -> Vec<Triple> {
        let loc = located_in();
        let mut out = Vec::new();
        for &c in tests {
            out.push(Triple::new(c, loc, self.region_of[&c]));
            if kind >= CountriesTaskKind::S2 {
                if let Some(&s) = self.subregion_of.get(&c) {
                    out.push(Triple::new(c, loc, s));
                }
            }
            if kind == CountriesTaskKind::S3 {
                for n in self.neighbors.get(&c).into_iter().flatten() {
                    if let Some(&r) = self.region_of.get(n) {
                        out.push(Triple::new(*n, loc, r));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CountriesTask {
    pub kind: CountriesTaskKind,
    pub train_kb: KnowledgeBase,
    pub test_queries: Vec<Triple>,
    pub removed: Vec<Triple>,
    /// Sampled test countries dropped because their query became unprovable.
    pub rejected: Vec<EntityId>,
}

impl CountriesTask {
    /// `(country, locatedIn, region)` for every country that is not a test country.
    pub fn train_queries(&self, structure: &CountriesStructure) -> Vec<Triple> {
        let tests: HashSet<EntityId> = self.test_queries.iter().map(|q| q.subject).collect();
        structure
            .region_of
            .iter()
            .filter(|(c, _)| !tests.contains(c))
            .map(|(&c, &r)| Triple::new(c, located_in(), r))
            .collect()
    }
}

fn provable(query: &Triple, kb: &KnowledgeBase, rules: &[HornRule], max_len: usize) -> bool {
    backward_chain(query, kb, rules, max_len)
        .iter()
        .any(|p| p.steps.len() <= max_len)
}

/// Samples test countries and removes facts per the task's scheme.
///
/// Countries are drawn in seeded order; a candidate is kept only if every
/// kept query (its own included) stays provable within the task's step bound
/// after the combined removals.
pub fn build_countries_tasks(
    raw: &KnowledgeBase,
    kind: CountriesTaskKind,
    test_fraction: f64,
    seed: u64,
) -> Result<CountriesTask, DatasetError> {
    let structure = CountriesStructure::from_kb(raw)?;
    let mut countries: Vec<EntityId> = structure.countries().collect();
    let wanted = ((test_fraction * countries.len() as f64).ceil() as usize).clamp(1, countries.len());
    countries.shuffle(&mut rng(seed));
    let rules = countries_rules();
    let loc = located_in();
    let bound = kind.max_proof_len();
    let mut accepted: Vec<EntityId> = Vec::new();
    let mut rejected = Vec::new();
    for c in countries {
        if accepted.len() == wanted {
            break;
        }
        let mut trial = accepted.clone();
        trial.push(c);
        let removed = structure.removals(kind, &trial);
        let kb = raw.without(&removed);
        let ok = trial
            .iter()
            .all(|&t| provable(&Triple::new(t, loc, structure.region_of[&t]), &kb, &rules, bound));
        if ok {
            accepted = trial;
        } else {
            log::info!("{kind}: {c} rejected as a test country (unprovable)");
            rejected.push(c);
        }
    }
    if accepted.is_empty() {
        return Err(DatasetError::UnprovableTestQuery { wanted, found: 0 });
    }
    if accepted.len() < wanted {
        log::warn!("{kind}: only {} of {wanted} test countries are provable", accepted.len());
    }
    let removed = structure.removals(kind, &accepted);
    Ok(CountriesTask {
        kind,
        train_kb: raw.without(&removed),
        test_queries: accepted
            .iter()
            .map(|&c| Triple::new(c, loc, structure.region_of[&c]))
            .collect(),
        removed,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    fn palau() -> KnowledgeBase {
        [
            t("palau", "locatedIn", "micronesia"),
            t("micronesia", "locatedIn", "oceania"),
            t("palau", "locatedIn", "oceania"),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn palau_s1() {
        let task = build_countries_tasks(&palau(), CountriesTaskKind::S1, 1.0, 0).unwrap();
        assert_eq!(task.test_queries, vec![t("palau", "locatedIn", "oceania")]);
        assert!(task.train_kb.contains(&t("palau", "locatedIn", "micronesia")));
        assert!(task.train_kb.contains(&t("micronesia", "locatedIn", "oceania")));
        assert!(!task.train_kb.contains(&t("palau", "locatedIn", "oceania")));
    }

    #[test]
    fn palau_s2_is_rejected() {
        let err = build_countries_tasks(&palau(), CountriesTaskKind::S2, 1.0, 0);
        assert!(matches!(err, Err(DatasetError::UnprovableTestQuery { .. })));
    }

    #[test]
    fn structure_of_bundled_kb() {
        let s = CountriesStructure::from_kb(&crate::data::countries_mini()).unwrap();
        assert_eq!(s.countries().count(), 30);
        assert_eq!(s.regions.len(), 3);
    }
}
