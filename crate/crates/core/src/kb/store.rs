use std::collections::{BTreeSet, HashMap};

use super::{EntityId, RelationId, Triple};

/// A deduplicated fact set with a subject index.
///
/// Facts keep their insertion order; the subject index lists fact positions in
/// that same order, so every slice is reproducible for a given load order.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    facts: Vec<Triple>,
    positions: HashMap<Triple, usize>,
    by_subject: HashMap<EntityId, Vec<usize>>,
    entities: BTreeSet<EntityId>,
    relations: BTreeSet<RelationId>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fact; returns `false` when it was already present.
    pub fn insert(&mut self, fact: Triple) -> bool {
        if self.positions.contains_key(&fact) {
            return false;
        }
        let id = self.facts.len();
        self.facts.push(fact);
        self.positions.insert(fact, id);
        self.by_subject.entry(fact.subject).or_default().push(id);
        self.entities.insert(fact.subject);
        self.entities.insert(fact.object);
        self.relations.insert(fact.relation);
        true
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, facts: I) -> usize {
        facts.into_iter().filter(|f| self.insert(*f)).count()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Triple) -> bool {
        self.positions.contains_key(fact)
    }

    pub fn position(&self, fact: &Triple) -> Option<usize> {
        self.positions.get(fact).copied()
    }

    pub fn fact(&self, id: usize) -> Triple {
        self.facts[id]
    }

    pub fn facts(&self) -> &[Triple] {
        &self.facts
    }

    /// Positions of the facts whose subject is `subject`, in insertion order.
    pub fn subject_fact_ids(&self, subject: EntityId) -> &[usize] {
        self.by_subject
            .get(&subject)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn facts_with_subject(&self, subject: EntityId) -> Vec<Triple> {
        self.subject_fact_ids(subject)
            .iter()
            .map(|&id| self.facts[id])
            .collect()
    }

    pub fn entities(&self) -> &BTreeSet<EntityId> {
        &self.entities
    }

    pub fn relations(&self) -> &BTreeSet<RelationId> {
        &self.relations
    }

    /// Copy of this KB without the given facts.
    pub fn without<'a, I: IntoIterator<Item = &'a Triple>>(&self, removed: I) -> KnowledgeBase {
        let removed: std::collections::HashSet<Triple> = removed.into_iter().copied().collect();
        self.facts
            .iter()
            .filter(|f| !removed.contains(f))
            .copied()
            .collect()
    }
}

impl FromIterator<Triple> for KnowledgeBase {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut kb = KnowledgeBase::new();
        kb.extend(iter);
        kb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    #[test]
    fn subject_slice_matches_table_example() {
        let kb: KnowledgeBase = [
            t("palau", "locatedIn", "micronesia"),
            t("micronesia", "locatedIn", "oceania"),
        ]
        .into_iter()
        .collect();
        let palau = EntityId::new("palau").unwrap();
        assert_eq!(
            kb.facts_with_subject(palau),
            vec![t("palau", "locatedIn", "micronesia")]
        );
        let absent = EntityId::new("nowhere-at-all").unwrap();
        assert!(kb.facts_with_subject(absent).is_empty());
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut kb = KnowledgeBase::new();
        assert!(kb.insert(t("a", "r", "b")));
        assert!(!kb.insert(t("a", "r", "b")));
        assert_eq!(kb.len(), 1);
    }

    fn arb_kb() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
        prop::collection::vec((0u8..15, 0u8..4, 0u8..15), 0..80)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn index_agrees_with_linear_scan(raw in arb_kb()) {
            let facts: Vec<Triple> = raw
                .iter()
                .map(|(s, p, o)| t(&format!("e{s}"), &format!("r{p}"), &format!("e{o}")))
                .collect();
            let kb: KnowledgeBase = facts.iter().copied().collect();
            let mut total = 0;
            for e in kb.entities() {
                let indexed = kb.facts_with_subject(*e);
                let scanned: Vec<Triple> = kb.facts().iter().filter(|f| f.subject == *e).copied().collect();
                prop_assert_eq!(&indexed, &scanned);
                total += indexed.len();
            }
            prop_assert_eq!(total, kb.len());
        }
    }
}
