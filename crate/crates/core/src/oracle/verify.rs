use serde::{Deserialize, Serialize};

use crate::kb::{chain_break, KnowledgeBase, Triple};

use super::compose::{compose_path, CompositionTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub reach: bool,
    pub verified: bool,
    pub reason: String,
}

impl Verdict {
    fn fail(reason: impl Into<String>) -> Self {
        Self {
            reach: false,
            verified: false,
            reason: reason.into(),
        }
    }
}

/// Checks a proof trace against its query.
///
/// `reach` needs a non-empty chained trace of KB facts that starts at the query
/// subject and ends at the query object; `verified` additionally needs the
/// relation composition of the trace to equal the query relation.
pub fn verify_trace(
    steps: &[Triple],
    query: &Triple,
    table: &CompositionTable,
    kb: &KnowledgeBase,
) -> Verdict {
    let (Some(first), Some(last)) = (steps.first(), steps.last()) else {
        return Verdict::fail("empty trace");
    };
    if let Some(i) = chain_break(steps) {
        return Verdict::fail(format!("chain broken after step {}", i + 1));
    }
    if let Some(i) = steps.iter().position(|s| !kb.contains(s)) {
        return Verdict::fail(format!("step {} {} is not in the KB", i + 1, steps[i]));
    }
    if first.subject != query.subject {
        return Verdict::fail(format!(
            "trace starts at {} instead of {}",
            first.subject, query.subject
        ));
    }
    if last.object != query.object {
        return Verdict::fail(format!(
            "trace ends at {} instead of {}",
            last.object, query.object
        ));
    }
    let (verified, reason) = match compose_path(steps, table) {
        Ok(Some(r)) if r == query.relation => (true, "ok".to_string()),
        Ok(Some(r)) => (false, format!("path composes to {r}, not {}", query.relation)),
        Ok(None) => (false, "path composition undefined".to_string()),
        Err(e) => (false, e.to_string()),
    };
    Verdict {
        reach: true,
        verified,
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{countries_composition, kinship_composition};

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    #[test]
    fn palau_trace_is_verified() {
        let steps = [
            t("palau", "locatedIn", "micronesia"),
            t("micronesia", "locatedIn", "oceania"),
        ];
        let kb: KnowledgeBase = steps.into_iter().collect();
        let v = verify_trace(&steps, &t("palau", "locatedIn", "oceania"), &countries_composition(), &kb);
        assert!(v.reach && v.verified, "{v:?}");
    }

    #[test]
    fn empty_trace_fails() {
        let v = verify_trace(&[], &t("a", "r", "b"), &CompositionTable::new(), &KnowledgeBase::new());
        assert!(!v.reach && !v.verified);
    }

    #[test]
    fn wrong_relation_reaches_but_is_not_verified() {
        let steps = [t("Ashley", "daughter", "Lillian"), t("Lillian", "brother", "Nicholas")];
        let kb: KnowledgeBase = steps.into_iter().collect();
        let v = verify_trace(&steps, &t("Ashley", "daughter", "Nicholas"), &kinship_composition(), &kb);
        assert!(v.reach);
        assert!(!v.verified);
        assert!(v.reason.contains("son"));
    }

    #[test]
    fn steps_outside_kb_do_not_reach() {
        let steps = [t("a", "r", "b")];
        let v = verify_trace(&steps, &t("a", "r", "b"), &CompositionTable::new(), &KnowledgeBase::new());
        assert!(!v.reach);
    }
}
