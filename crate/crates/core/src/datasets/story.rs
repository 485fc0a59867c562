use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

use crate::kb::{EntityId, KbError, RelationId, Triple, VerbalizationSchema};
use crate::util::rng;

use super::Gender;

const TEMPLATES: &[&str] = &[
    "{s} told {pro} {rel} {o} to wash up.",
    "{s} went to the market with {pro} {rel} {o}.",
    "{s} and {pro} {rel} {o} took a walk in the park.",
    "{s} called {pro} {rel} {o} to say hello.",
];

fn pronoun(gender: Option<Gender>) -> &'static str {
    match gender {
        Some(Gender::Male) => "his",
        Some(Gender::Female) => "her",
        None => "their",
    }
}

/// One templated sentence per fact, in seeded order.
///
/// `genders` supplies the possessive pronoun for each subject; unknown
/// subjects get "their".
pub fn render_story(facts: &[Triple], genders: &BTreeMap<EntityId, Gender>, seed: u64) -> String {
    let mut r = rng(seed);
    let mut sentences: Vec<String> = facts
        .iter()
        .map(|f| {
            let template = TEMPLATES[r.gen_range(0..TEMPLATES.len())];
            template
                .replace("{s}", f.subject.as_str())
                .replace("{pro}", pronoun(genders.get(&f.subject).copied()))
                .replace("{rel}", f.relation.as_str())
                .replace("{o}", f.object.as_str())
        })
        .collect();
    sentences.shuffle(&mut r);
    sentences.join(" ")
}

/// Recovers the facts of a story produced by [`render_story`].
pub fn parse_story(text: &str, schema: &VerbalizationSchema) -> Result<Vec<Triple>, KbError> {
    let mut relations: Vec<&str> = schema.relations().map(RelationId::as_str).collect();
    relations.sort_by_key(|r| std::cmp::Reverse(r.len()));
    let rel_alt = relations
        .iter()
        .map(|r| regex::escape(r))
        .collect::<Vec<_>>()
        .join("|");
    let mut found: Vec<(usize, Triple)> = Vec::new();
    for template in TEMPLATES {
        let pattern = regex::escape(template)
            .replace(r"\{s\}", r"(?P<s>[\w\-]+)")
            .replace(r"\{pro\}", "(?:his|her|their)")
            .replace(r"\{rel\}", &format!("(?P<rel>{rel_alt})"))
            .replace(r"\{o\}", r"(?P<o>[\w\-]+)");
        let re = Regex::new(&pattern).expect("story templates compile");
        for caps in re.captures_iter(text) {
            let t = Triple::from_strs(&caps["s"], &caps["rel"], &caps["o"])?;
            found.push((caps.get(0).map_or(0, |m| m.start()), t));
        }
    }
    found.sort_by_key(|(pos, _)| *pos);
    Ok(found.into_iter().map(|(_, t)| t).collect())
}
