//! Relation templates that turn triples into sentences and back.
//!
//! A schema file is a JSON object mapping each relation name to a template
//! containing one `{s}` and one `{o}` placeholder:
//!
//! ```json
//! { "daughter": "{s}'s daughter is {o}", "son": "{s}'s son is {o}" }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use super::{EntityId, KbError, RelationId, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaStyle {
    /// `"{s}'s daughter is {o}"`
    PossessiveKinship,
    /// `"{s} locatedIn {o}"`
    Infix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Template {
    raw: String,
    lead: String,
    middle: String,
    tail: String,
    subject_first: bool,
}

impl Template {
    fn compile(relation: &str, raw: &str) -> Result<Self, KbError> {
        let raw = raw.trim().to_string();
        let bad = || KbError::BadTemplate {
            relation: relation.to_string(),
            template: raw.clone(),
        };
        if raw.matches("{s}").count() != 1 || raw.matches("{o}").count() != 1 {
            return Err(bad());
        }
        let s_at = raw.find("{s}").ok_or_else(bad)?;
        let o_at = raw.find("{o}").ok_or_else(bad)?;
        let (first, second) = if s_at < o_at { (s_at, o_at) } else { (o_at, s_at) };
        let middle = raw[first + 3..second].to_string();
        if middle.is_empty() {
            return Err(bad());
        }
        Ok(Self {
            lead: raw[..first].to_string(),
            middle,
            tail: raw[second + 3..].to_string(),
            subject_first: s_at < o_at,
            raw,
        })
    }

    fn render(&self, subject: &str, object: &str) -> String {
        self.raw.replace("{s}", subject).replace("{o}", object)
    }

    /// Returns `(subject, object)` when `text` fits this template.
    fn capture<'t>(&self, text: &'t str) -> Option<(&'t str, &'t str)> {
        let inner = text.strip_prefix(self.lead.as_str())?;
        let inner = inner.strip_suffix(self.tail.as_str())?;
        let at = inner.find(self.middle.as_str())?;
        let first = &inner[..at];
        let second = &inner[at + self.middle.len()..];
        let clean = |part: &str| !part.is_empty() && part.trim() == part;
        if !clean(first) || !clean(second) {
            return None;
        }
        if self.subject_first {
            Some((first, second))
        } else {
            Some((second, first))
        }
    }
}

/// Verbalization templates for one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbalizationSchema {
    style: SchemaStyle,
    templates: BTreeMap<RelationId, Template>,
}

impl VerbalizationSchema {
    pub fn from_templates<I, K, V>(entries: I) -> Result<Self, KbError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut templates = BTreeMap::new();
        for (relation, raw) in entries {
            let rel = RelationId::new(relation.as_ref())?;
            templates.insert(rel, Template::compile(rel.as_str(), raw.as_ref())?);
        }
        if templates.is_empty() {
            return Err(KbError::EmptySchema);
        }
        let infix = templates
            .iter()
            .all(|(rel, t)| t.raw == format!("{{s}} {rel} {{o}}"));
        let style = if infix {
            SchemaStyle::Infix
        } else {
            SchemaStyle::PossessiveKinship
        };
        Ok(Self { style, templates })
    }

    /// Infix schema (`"{s} <relation> {o}"`) over the given relations.
    pub fn infix<I, S>(relations: I) -> Result<Self, KbError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: Vec<(String, String)> = relations
            .into_iter()
            .map(|r| {
                let r = r.as_ref().trim().to_string();
                let t = format!("{{s}} {r} {{o}}");
                (r, t)
            })
            .collect();
        Self::from_templates(entries)
    }

    /// Possessive schema (`"{s}'s <relation> is {o}"`) over the given relations.
    pub fn possessive<I, S>(relations: I) -> Result<Self, KbError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: Vec<(String, String)> = relations
            .into_iter()
            .map(|r| {
                let r = r.as_ref().trim().to_string();
                let t = format!("{{s}}'s {r} is {{o}}");
                (r, t)
            })
            .collect();
        Self::from_templates(entries)
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| KbError::Json(e.to_string()))?;
        Self::from_templates(map)
    }

    pub fn load(path: &Path) -> Result<Self, KbError> {
        let text = std::fs::read_to_string(path).map_err(|e| KbError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &str> = self
            .templates
            .iter()
            .map(|(r, t)| (r.as_str(), t.raw.as_str()))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    pub fn style(&self) -> SchemaStyle {
        self.style
    }

    /// Relation vocabulary in lexicographic order.
    pub fn relations(&self) -> impl Iterator<Item = RelationId> + '_ {
        self.templates.keys().copied()
    }

    pub fn contains(&self, relation: RelationId) -> bool {
        self.templates.contains_key(&relation)
    }

    /// Renders arbitrary subject/object strings, e.g. variables `"A"`, `"?ENT"`.
    pub fn render(&self, subject: &str, relation: RelationId, object: &str) -> Result<String, KbError> {
        let template = self
            .templates
            .get(&relation)
            .ok_or_else(|| KbError::UnknownRelation(relation.as_str().to_string()))?;
        Ok(template.render(subject, object))
    }

    pub fn verbalize(&self, triple: &Triple) -> Result<String, KbError> {
        self.render(
            triple.subject.as_str(),
            triple.relation,
            triple.object.as_str(),
        )
    }

    pub fn parse(&self, text: &str) -> Result<Triple, KbError> {
        let text = text.trim();
        let mut best: Option<(usize, RelationId, &str, &str)> = None;
        for (rel, template) in &self.templates {
            if let Some((s, o)) = template.capture(text) {
                let specificity = template.middle.len() + template.lead.len() + template.tail.len();
                if best.is_none_or(|(b, ..)| specificity > b) {
                    best = Some((specificity, *rel, s, o));
                }
            }
        }
        if let Some((_, rel, s, o)) = best {
            return Ok(Triple::new(EntityId::new(s)?, rel, EntityId::new(o)?));
        }
        match self.guess_relation_word(text) {
            Some(word) => Err(KbError::UnknownRelation(word)),
            None => Err(KbError::UnparsableText(text.to_string())),
        }
    }

    /// Detects sentences that have the schema's shape but name a relation it lacks.
    fn guess_relation_word(&self, text: &str) -> Option<String> {
        match self.style {
            SchemaStyle::Infix => {
                let words: Vec<&str> = text.split_whitespace().collect();
                (words.len() == 3).then(|| words[1].to_string())
            }
            SchemaStyle::PossessiveKinship => {
                let (_, rest) = text.split_once("'s ")?;
                let (word, object) = rest.split_once(" is ")?;
                (!word.is_empty() && !word.contains(' ') && !object.trim().is_empty())
                    .then(|| word.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinship() -> VerbalizationSchema {
        VerbalizationSchema::possessive(["daughter", "son", "son-in-law", "sister", "brother"]).unwrap()
    }

    #[test]
    fn parses_table_examples() {
        let countries = VerbalizationSchema::infix(["locatedIn", "neighborOf"]).unwrap();
        assert_eq!(countries.style(), SchemaStyle::Infix);
        assert_eq!(
            countries.parse("palau locatedIn micronesia").unwrap(),
            Triple::from_strs("palau", "locatedIn", "micronesia").unwrap()
        );
        let k = kinship();
        assert_eq!(k.style(), SchemaStyle::PossessiveKinship);
        assert_eq!(
            k.parse("Ashley's daughter is Lillian").unwrap(),
            Triple::from_strs("Ashley", "daughter", "Lillian").unwrap()
        );
    }

    #[test]
    fn verbalizes_canonically() {
        let countries = VerbalizationSchema::infix(["locatedIn"]).unwrap();
        let t = Triple::from_strs("micronesia", "locatedIn", "oceania").unwrap();
        assert_eq!(countries.verbalize(&t).unwrap(), "micronesia locatedIn oceania");
        let k = kinship();
        let t = Triple::from_strs("Carrie", "sister", "Natasha").unwrap();
        assert_eq!(k.verbalize(&t).unwrap(), "Carrie's sister is Natasha");
    }

    #[test]
    fn entities_with_spaces_survive_infix() {
        let countries = VerbalizationSchema::infix(["neighborOf"]).unwrap();
        let t = countries
            .parse("sudan neighborOf central african republic")
            .unwrap();
        assert_eq!(t.object.as_str(), "central african republic");
    }

    #[test]
    fn more_specific_template_wins() {
        let k = kinship();
        let t = k.parse("Ann's son-in-law is Bob").unwrap();
        assert_eq!(t.relation.as_str(), "son-in-law");
    }

    #[test]
    fn error_kinds() {
        let k = kinship();
        assert!(matches!(k.parse("Ann's cousin is Bob"), Err(KbError::UnknownRelation(r)) if r == "cousin"));
        assert!(matches!(k.parse("nothing to see"), Err(KbError::UnparsableText(_))));
        let countries = VerbalizationSchema::infix(["locatedIn"]).unwrap();
        assert!(matches!(countries.parse("a borders b"), Err(KbError::UnknownRelation(_))));
        let t = Triple::from_strs("a", "borders", "b").unwrap();
        assert!(matches!(countries.verbalize(&t), Err(KbError::UnknownRelation(_))));
    }

    #[test]
    fn templates_need_both_placeholders() {
        assert!(VerbalizationSchema::from_templates([("r", "{s} r")]).is_err());
        assert!(VerbalizationSchema::from_templates([("r", "{s}{o}")]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let k = kinship();
        let back = VerbalizationSchema::from_json(&k.to_json()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn verbalize_is_injective_over_vocab() {
        let k = kinship();
        let mut seen = std::collections::HashSet::new();
        for rel in k.relations() {
            assert!(seen.insert(k.render("X", rel, "Y").unwrap()));
        }
    }
}
