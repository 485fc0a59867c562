use crate::kb::{EntityId, KnowledgeBase, Triple};

/// All simple fact chains from `src` to `dst` with at most `max_len` steps.
///
/// Depth-first over the subject index, so the order follows fact insertion
/// order at each hop.
pub fn find_ground_paths(
    kb: &KnowledgeBase,
    src: EntityId,
    dst: EntityId,
    max_len: usize,
) -> Vec<Vec<Triple>> {
    let mut out = Vec::new();
    if src == dst || max_len == 0 {
        return out;
    }
    let mut visited = vec![src];
    let mut path = Vec::new();
    walk(kb, src, dst, max_len, &mut visited, &mut path, &mut out);
    out
}

fn walk(
    kb: &KnowledgeBase,
    current: EntityId,
    dst: EntityId,
    remaining: usize,
    visited: &mut Vec<EntityId>,
    path: &mut Vec<Triple>,
    out: &mut Vec<Vec<Triple>>,
) {
    for &id in kb.subject_fact_ids(current) {
        let fact = kb.fact(id);
        if visited.contains(&fact.object) {
            continue;
        }
        path.push(fact);
        if fact.object == dst {
            out.push(path.clone());
        } else if remaining > 1 {
            visited.push(fact.object);
            walk(kb, fact.object, dst, remaining - 1, visited, path, out);
            visited.pop();
        }
        path.pop();
    }
}
