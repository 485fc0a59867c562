//! Depth-bounded backward chaining over chain-shaped Horn rules.
//!
//! Subgoals always have a bound subject because rule bodies are chains, so
//! solutions are tabled per `(relation, subject, remaining budget)`. A proof's
//! depth is the number of rule expansions in its tree; a fact lookup has depth
//! zero. Leaf sequences must form simple paths (no entity repeats), and proofs
//! are identified by their leaf sequence: two derivation trees over the same
//! facts count once, with the first one found kept.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triple};

use super::term::{unify, Bindings, HornRule, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub goal: Triple,
    pub steps: Vec<Triple>,
    pub depth: usize,
}

#[derive(Debug, Clone)]
struct Derivation {
    object: EntityId,
    steps: Vec<Triple>,
    depth: usize,
}

type Table = Rc<Vec<Derivation>>;

struct Solver<'a> {
    kb: &'a KnowledgeBase,
    rules: &'a [HornRule],
    memo: HashMap<(RelationId, EntityId, usize), Table>,
}

impl Solver<'_> {
    fn solve(&mut self, relation: RelationId, subject: EntityId, budget: usize) -> Table {
        if let Some(hit) = self.memo.get(&(relation, subject, budget)) {
            return Rc::clone(hit);
        }
        let mut found = Vec::new();
        if budget > 0 {
            for rule in self.rules {
                if rule.head.relation != relation {
                    continue;
                }
                let mut bindings = Bindings::new();
                match &rule.head.args[0] {
                    Term::Const(c) if *c != subject => continue,
                    Term::Const(_) => {}
                    Term::Var(v) => {
                        bindings.insert(v.clone(), subject);
                    }
                }
                let mut partial = Partial {
                    rule,
                    current: subject,
                    remaining: budget - 1,
                    bindings,
                    steps: Vec::new(),
                    depth: 1,
                };
                self.expand(&mut partial, 0, &mut found);
            }
        }
        for &id in self.kb.subject_fact_ids(subject) {
            let fact = self.kb.fact(id);
            if fact.relation == relation {
                found.push(Derivation {
                    object: fact.object,
                    steps: vec![fact],
                    depth: 0,
                });
            }
        }
        let mut seen = HashSet::new();
        found.retain(|d| seen.insert(d.steps.clone()));
        let table = Rc::new(found);
        self.memo.insert((relation, subject, budget), Rc::clone(&table));
        table
    }

    fn expand(&mut self, p: &mut Partial<'_>, index: usize, out: &mut Vec<Derivation>) {
        let Some(atom) = p.rule.body.get(index) else {
            if let Some(object) = resolve(&p.rule.head.args[1], &p.bindings) {
                out.push(Derivation {
                    object,
                    steps: p.steps.clone(),
                    depth: p.depth,
                });
            }
            return;
        };
        let subs = self.solve(atom.relation, p.current, p.remaining);
        let start = p.steps.first().map_or(p.current, |s| s.subject);
        for d in subs.iter() {
            let link = Triple::new(p.current, atom.relation, d.object);
            let Some(bindings) = unify(atom, &link, &p.bindings) else {
                continue;
            };
            let revisits = d.steps.iter().any(|s| {
                s.object == start || p.steps.iter().any(|prev| prev.object == s.object)
            });
            if revisits {
                continue;
            }
            let saved = (
                p.current,
                p.remaining,
                std::mem::replace(&mut p.bindings, bindings),
                p.steps.len(),
                p.depth,
            );
            p.current = d.object;
            p.remaining -= d.depth;
            p.depth += d.depth;
            p.steps.extend_from_slice(&d.steps);
            self.expand(p, index + 1, out);
            p.current = saved.0;
            p.remaining = saved.1;
            p.bindings = saved.2;
            p.steps.truncate(saved.3);
            p.depth = saved.4;
        }
    }
}

struct Partial<'r> {
    rule: &'r HornRule,
    current: EntityId,
    remaining: usize,
    bindings: Bindings,
    steps: Vec<Triple>,
    depth: usize,
}

fn resolve(term: &Term, bindings: &Bindings) -> Option<EntityId> {
    match term {
        Term::Const(c) => Some(*c),
        Term::Var(v) => bindings.get(v).copied(),
    }
}

/// All proofs of `goal` using at most `max_depth` rule expansions.
///
/// Rules are tried before facts at every node, in the given rule order; facts
/// follow the KB's subject-index order.
pub fn backward_chain(
    goal: &Triple,
    kb: &KnowledgeBase,
    rules: &[HornRule],
    max_depth: usize,
) -> Vec<Proof> {
    let mut solver = Solver {
        kb,
        rules,
        memo: HashMap::new(),
    };
    let table = solver.solve(goal.relation, goal.subject, max_depth);
    table
        .iter()
        .filter(|d| d.object == goal.object)
        .map(|d| Proof {
            goal: *goal,
            steps: d.steps.clone(),
            depth: d.depth,
        })
        .collect()
}

/// Shortest proof, ties broken by discovery order.
pub fn shortest_proof(
    goal: &Triple,
    kb: &KnowledgeBase,
    rules: &[HornRule],
    max_depth: usize,
) -> Option<Proof> {
    backward_chain(goal, kb, rules, max_depth)
        .into_iter()
        .min_by_key(|p| p.steps.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    fn transitive(rel: &str) -> HornRule {
        HornRule::parse(&format!("{rel}(X, Y) :- {rel}(X, M), {rel}(M, Y)")).unwrap()
    }

    #[test]
    fn palau_two_step_proof() {
        let kb: KnowledgeBase = [
            t("palau", "locatedIn", "micronesia"),
            t("micronesia", "locatedIn", "oceania"),
        ]
        .into_iter()
        .collect();
        let goal = t("palau", "locatedIn", "oceania");
        let proofs = backward_chain(&goal, &kb, &[transitive("locatedIn")], 2);
        assert_eq!(proofs.len(), 1);
        assert_eq!(proofs[0].steps, kb.facts().to_vec());
        assert_eq!(proofs[0].depth, 1);
    }

    #[test]
    fn fact_goal_is_depth_zero() {
        let kb: KnowledgeBase = [t("a", "r", "b")].into_iter().collect();
        let proofs = backward_chain(&t("a", "r", "b"), &kb, &[transitive("r")], 1);
        assert_eq!(proofs.len(), 1);
        assert_eq!(proofs[0].depth, 0);
        assert_eq!(proofs[0].steps, vec![t("a", "r", "b")]);
    }

    #[test]
    fn depth_bound_limits_path_length() {
        let kb: KnowledgeBase = [
            t("a", "r", "b"),
            t("b", "r", "c"),
            t("c", "r", "d"),
        ]
        .into_iter()
        .collect();
        let goal = t("a", "r", "d");
        assert!(backward_chain(&goal, &kb, &[transitive("r")], 1).is_empty());
        let proofs = backward_chain(&goal, &kb, &[transitive("r")], 2);
        assert_eq!(proofs.len(), 1);
        assert_eq!(proofs[0].steps.len(), 3);
    }

    #[test]
    fn cycles_do_not_produce_proofs() {
        let kb: KnowledgeBase = [t("a", "r", "b"), t("b", "r", "a"), t("b", "r", "c")]
            .into_iter()
            .collect();
        let proofs = backward_chain(&t("a", "r", "c"), &kb, &[transitive("r")], 5);
        assert_eq!(proofs.len(), 1);
    }

    #[test]
    fn composition_rules_prove_kinship() {
        let kb: KnowledgeBase = [
            t("Ashley", "daughter", "Lillian"),
            t("Lillian", "brother", "Nicholas"),
        ]
        .into_iter()
        .collect();
        let rule = HornRule::parse("son(A, C) :- daughter(A, B), brother(B, C)").unwrap();
        let proofs = backward_chain(&t("Ashley", "son", "Nicholas"), &kb, &[rule], 1);
        assert_eq!(proofs.len(), 1);
    }
}
