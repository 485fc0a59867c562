use std::collections::BTreeMap;
use std::path::Path;

use crate::kb::{chain_break, RelationId, Triple};

use super::term::{Atom, HornRule, Term};
use super::OracleError;

/// Partial map `(r1, r2) -> r3`: a path `r1` then `r2` implies `r3`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompositionTable {
    map: BTreeMap<(RelationId, RelationId), RelationId>,
}

impl CompositionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry. Re-adding an identical entry is a no-op.
    pub fn insert(
        &mut self,
        first: RelationId,
        second: RelationId,
        result: RelationId,
    ) -> Result<(), OracleError> {
        match self.map.insert((first, second), result) {
            Some(prev) if prev != result => Err(OracleError::CompositionConflict(
                first.to_string(),
                second.to_string(),
                prev.to_string(),
                result.to_string(),
            )),
            _ => Ok(()),
        }
    }

    /// Parses a JSON list of `[r1, r2, r3]` triples.
    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let rows: Vec<[String; 3]> = serde_json::from_str(text)?;
        let mut table = Self::new();
        for [a, b, c] in rows {
            table.insert(RelationId::new(&a)?, RelationId::new(&b)?, RelationId::new(&c)?)?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<[&str; 3]> = self
            .entries()
            .map(|(a, b, c)| [a.as_str(), b.as_str(), c.as_str()])
            .collect();
        serde_json::to_string_pretty(&rows).expect("string rows serialize")
    }

    pub fn get(&self, first: RelationId, second: RelationId) -> Option<RelationId> {
        self.map.get(&(first, second)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (RelationId, RelationId, RelationId)> + '_ {
        self.map.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    /// One chain rule `r3(A, C) :- r1(A, B), r2(B, C)` per entry.
    pub fn rules(&self) -> Vec<HornRule> {
        let var = |v: &str| Term::var(v);
        self.entries()
            .map(|(a, b, c)| HornRule {
                head: Atom::new(c, var("A"), var("C")),
                body: vec![Atom::new(a, var("A"), var("B")), Atom::new(b, var("B"), var("C"))],
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Left-fold of the table over the step relations.
///
/// `Ok(None)` when some intermediate pair is unmapped or `steps` is empty.
pub fn compose_path(
    steps: &[Triple],
    table: &CompositionTable,
) -> Result<Option<RelationId>, OracleError> {
    if let Some(i) = chain_break(steps) {
        return Err(OracleError::ChainBroken(i));
    }
    let mut relations = steps.iter().map(|s| s.relation);
    let Some(first) = relations.next() else {
        return Ok(None);
    };
    Ok(relations.try_fold(first, |acc, r| table.get(acc, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::kinship_composition;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    fn rel(r: &str) -> RelationId {
        RelationId::new(r).unwrap()
    }

    #[test]
    fn kinship_examples() {
        let table = kinship_composition();
        let path = [t("Ashley", "daughter", "Lillian"), t("Lillian", "brother", "Nicholas")];
        assert_eq!(compose_path(&path, &table).unwrap(), Some(rel("son")));
        let path = [t("George", "brother", "Dale"), t("Dale", "sister", "Nancy")];
        assert_eq!(compose_path(&path, &table).unwrap(), Some(rel("sister")));
        assert_eq!(
            compose_path(&[t("a", "uncle", "b")], &table).unwrap(),
            Some(rel("uncle"))
        );
    }

    #[test]
    fn broken_chain_is_an_error() {
        let table = kinship_composition();
        let path = [t("a", "son", "b"), t("c", "son", "d")];
        assert!(matches!(compose_path(&path, &table), Err(OracleError::ChainBroken(0))));
    }

    #[test]
    fn unmapped_pair_is_undefined() {
        let path = [t("a", "x", "b"), t("b", "y", "c")];
        assert_eq!(compose_path(&path, &CompositionTable::new()).unwrap(), None);
    }

    #[test]
    fn conflicting_entries_rejected() {
        let err = CompositionTable::from_json(r#"[["a","b","c"],["a","b","d"]]"#);
        assert!(matches!(err, Err(OracleError::CompositionConflict(..))));
        let table = CompositionTable::from_json(r#"[["a","b","c"],["a","b","c"]]"#).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(CompositionTable::from_json(&table.to_json()).unwrap(), table);
    }
}
