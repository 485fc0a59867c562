use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kb::{EntityId, KnowledgeBase, RelationId, Triple};
use crate::util::rng;

use super::names::NameSource;
use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    fn pick(self, male: &'static str, female: &'static str) -> &'static str {
        match self {
            Gender::Male => male,
            Gender::Female => female,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Person {
    pub name: EntityId,
    pub gender: Gender,
    pub father: Option<usize>,
    pub mother: Option<usize>,
    pub spouse: Option<usize>,
    pub generation: u32,
}

/// A connected family tree with its kinship facts.
///
/// Facts cover the eight core relations (parents, children, siblings,
/// spouses) in both directions; the remaining relations are derived by
/// [`FamilyGraph::relation_between`].
#[derive(Debug, Clone)]
pub struct FamilyGraph {
    pub seed: u64,
    pub people: Vec<Person>,
    pub facts: KnowledgeBase,
}

const MAX_GENERATION: u32 = 3;
const MAX_CHILDREN: usize = 6;

pub fn generate_family_graph(n_entities: usize, seed: u64) -> Result<FamilyGraph, DatasetError> {
    if n_entities < 4 {
        return Err(DatasetError::InfeasibleSize(n_entities));
    }
    let mut r = rng(seed);
    let mut names = NameSource::default();
    let mut people: Vec<Person> = Vec::with_capacity(n_entities);
    let mut add = |people: &mut Vec<Person>, gender, father, mother, generation| {
        people.push(Person {
            name: EntityId::new(&names.next(gender)).expect("generated names are non-empty"),
            gender,
            father,
            mother,
            spouse: None,
            generation,
        });
        people.len() - 1
    };
    let root_m = add(&mut people, Gender::Male, None, None, 0);
    let root_f = add(&mut people, Gender::Female, None, None, 0);
    people[root_m].spouse = Some(root_f);
    people[root_f].spouse = Some(root_m);

    while people.len() < n_entities {
        let couples: Vec<(usize, usize)> = people
            .iter()
            .enumerate()
            .filter(|(_, p)| p.gender == Gender::Male && p.generation < MAX_GENERATION)
            .filter_map(|(i, p)| p.spouse.map(|w| (i, w)))
            .filter(|&(h, _)| people.iter().filter(|c| c.father == Some(h)).count() < MAX_CHILDREN)
            .collect();
        let singles: Vec<usize> = people
            .iter()
            .enumerate()
            .filter(|(_, p)| p.spouse.is_none() && p.father.is_some())
            .map(|(i, _)| i)
            .collect();
        let want_child = r.gen_bool(0.65);
        if !couples.is_empty() && (want_child || singles.is_empty()) {
            let &(father, mother) = couples.choose(&mut r).expect("non-empty");
            let gender = if r.gen_bool(0.5) { Gender::Male } else { Gender::Female };
            let generation = people[father].generation.max(people[mother].generation) + 1;
            add(&mut people, gender, Some(father), Some(mother), generation);
        } else if let Some(&single) = singles.choose(&mut r) {
            let gender = match people[single].gender {
                Gender::Male => Gender::Female,
                Gender::Female => Gender::Male,
            };
            let generation = people[single].generation;
            let spouse = add(&mut people, gender, None, None, generation);
            people[spouse].spouse = Some(single);
            people[single].spouse = Some(spouse);
        } else {
            return Err(DatasetError::InfeasibleSize(n_entities));
        }
    }
    let mut graph = FamilyGraph {
        seed,
        people,
        facts: KnowledgeBase::new(),
    };
    graph.facts = graph.core_facts();
    Ok(graph)
}

fn rel(name: &str) -> RelationId {
    RelationId::new(name).expect("relation names are non-empty")
}

impl FamilyGraph {
    pub fn len(&self) -> usize {
        self.people.len()
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    pub fn index_of(&self, name: EntityId) -> Option<usize> {
        self.people.iter().position(|p| p.name == name)
    }

    fn parents(&self, i: usize) -> impl Iterator<Item = usize> {
        let p = &self.people[i];
        p.father.into_iter().chain(p.mother)
    }

    fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.people.len()).filter(move |&c| self.parents(c).any(|p| p == i))
    }

    fn siblings(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (&self.people[a], &self.people[b]);
        a != b && pa.father.is_some() && pa.father == pb.father && pa.mother == pb.mother
    }

    fn core_facts(&self) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        let mut emit = |a: usize, relation: &str, b: usize| {
            kb.insert(Triple::new(self.people[a].name, rel(relation), self.people[b].name));
        };
        for a in 0..self.people.len() {
            for b in 0..self.people.len() {
                let r = match self.relation_between(a, b) {
                    Some(r) => r,
                    None => continue,
                };
                if matches!(
                    r,
                    "father" | "mother" | "son" | "daughter" | "brother" | "sister" | "husband" | "wife"
                ) {
                    emit(a, r, b);
                }
            }
        }
        kb
    }

    /// `b`'s role relative to `a` (`b` is `a`'s ...), if it is one of the 22 kinship relations.
    pub fn relation_between(&self, a: usize, b: usize) -> Option<&'static str> {
        if a == b {
            return None;
        }
        let pa = &self.people[a];
        let g = self.people[b].gender;
        if pa.spouse == Some(b) {
            return Some(g.pick("husband", "wife"));
        }
        if self.parents(a).any(|p| p == b) {
            return Some(g.pick("father", "mother"));
        }
        if self.parents(b).any(|p| p == a) {
            return Some(g.pick("son", "daughter"));
        }
        if self.siblings(a, b) {
            return Some(g.pick("brother", "sister"));
        }
        if self.parents(a).any(|p| self.parents(p).any(|gp| gp == b)) {
            return Some(g.pick("grandfather", "grandmother"));
        }
        if self.parents(b).any(|p| self.parents(p).any(|gp| gp == a)) {
            return Some(g.pick("grandson", "granddaughter"));
        }
        if self.parents(a).any(|p| self.siblings(p, b)) {
            return Some(g.pick("uncle", "aunt"));
        }
        if self.parents(b).any(|p| self.siblings(p, a)) {
            return Some(g.pick("nephew", "niece"));
        }
        if let Some(s) = pa.spouse {
            if self.parents(s).any(|p| p == b) {
                return Some(g.pick("father-in-law", "mother-in-law"));
            }
            if self.siblings(s, b) {
                return Some(g.pick("brother-in-law", "sister-in-law"));
            }
        }
        if let Some(s) = self.people[b].spouse {
            if self.children(a).any(|c| c == s) {
                return Some(g.pick("son-in-law", "daughter-in-law"));
            }
            if self.siblings(a, s) {
                return Some(g.pick("brother-in-law", "sister-in-law"));
            }
        }
        None
    }
}
