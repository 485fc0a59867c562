use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::kb::{KnowledgeBase, Triple, VerbalizationSchema};

use super::{cosine, BackendError, EmbeddingVector, Translator};

const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub fact: Triple,
    pub score: f64,
    pub candidate_index: usize,
}

/// First non-empty line of a generation, with any `Step k:` prefix removed.
pub fn normalize_candidate(text: &str) -> String {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if let Some(rest) = line.strip_prefix("Step") {
        let rest = rest.trim_start();
        let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        if digits > 0 {
            if let Some(tail) = rest[digits..].strip_prefix(':') {
                return tail.trim().to_string();
            }
        }
    }
    line.to_string()
}

/// Renderings and embeddings of every fact of one KB, by fact position.
#[derive(Debug, Clone)]
pub struct FactIndex {
    renderings: Vec<String>,
    embeddings: Vec<EmbeddingVector>,
}

impl FactIndex {
    pub fn build(
        kb: &KnowledgeBase,
        schema: &VerbalizationSchema,
        translator: &dyn Translator,
    ) -> Result<Self, BackendError> {
        let renderings = kb
            .facts()
            .iter()
            .map(|f| schema.verbalize(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        let embeddings = translator.embed_batch(&renderings)?;
        if embeddings.len() != renderings.len() {
            return Err(BackendError::Protocol(format!(
                "translator returned {} embeddings for {} facts",
                embeddings.len(),
                renderings.len()
            )));
        }
        Ok(Self {
            renderings,
            embeddings,
        })
    }

    pub fn len(&self) -> usize {
        self.renderings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.renderings.is_empty()
    }

    pub fn rendering(&self, fact_id: usize) -> &str {
        &self.renderings[fact_id]
    }

    pub fn embedding(&self, fact_id: usize) -> &EmbeddingVector {
        &self.embeddings[fact_id]
    }
}

struct Best<'a> {
    score: f64,
    candidate: usize,
    rendering: &'a str,
    fact_id: usize,
}

impl Best<'_> {
    fn beats(&self, other: &Best<'_>) -> bool {
        if self.score > other.score + SCORE_EPS {
            return true;
        }
        if self.score < other.score - SCORE_EPS {
            return false;
        }
        match self.candidate.cmp(&other.candidate) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.rendering < other.rendering,
        }
    }
}

/// Projects candidates onto the facts `slice` (positions in `kb`).
///
/// Returns the globally best (candidate, fact) pair by cosine similarity;
/// ties go to the lower candidate index, then to the smaller rendering.
pub fn project_indexed(
    candidates: &[String],
    slice: &[usize],
    kb: &KnowledgeBase,
    index: &FactIndex,
    translator: &dyn Translator,
) -> Result<ProjectionResult, BackendError> {
    if slice.is_empty() {
        return Err(BackendError::EmptySlice);
    }
    let mut best: Option<Best<'_>> = None;
    let mut any = false;
    for (ci, raw) in candidates.iter().enumerate() {
        let text = normalize_candidate(raw);
        if text.is_empty() {
            continue;
        }
        let v = match translator.embed(&text) {
            Ok(v) => v,
            Err(BackendError::EmptyText) => continue,
            Err(e) => return Err(e),
        };
        any = true;
        for &fact_id in slice {
            let score = match cosine(&v, index.embedding(fact_id)) {
                Ok(s) => s,
                Err(BackendError::ZeroVector) => 0.0,
                Err(e) => return Err(e),
            };
            let here = Best {
                score,
                candidate: ci,
                rendering: index.rendering(fact_id),
                fact_id,
            };
            if best.as_ref().is_none_or(|b| here.beats(b)) {
                best = Some(here);
            }
        }
    }
    let best = best.filter(|_| any).ok_or(BackendError::NoCandidates)?;
    Ok(ProjectionResult {
        fact: kb.fact(best.fact_id),
        score: best.score,
        candidate_index: best.candidate,
    })
}

/// Unindexed projection over an explicit fact list.
pub fn project(
    candidates: &[String],
    slice: &[Triple],
    translator: &dyn Translator,
    schema: &VerbalizationSchema,
) -> Result<ProjectionResult, BackendError> {
    if slice.is_empty() {
        return Err(BackendError::EmptySlice);
    }
    let kb: KnowledgeBase = slice.iter().copied().collect();
    let index = FactIndex::build(&kb, schema, translator)?;
    let ids: Vec<usize> = (0..kb.len()).collect();
    project_indexed(candidates, &ids, &kb, &index, translator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{ExactTranslator, HashTranslator};
    use crate::data::{countries_schema, kinship_schema};

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    #[test]
    fn exact_match_scores_one() {
        let slice = [t("palau", "locatedIn", "micronesia")];
        let r = project(
            &["palau locatedIn micronesia".into()],
            &slice,
            &HashTranslator::default(),
            &countries_schema(),
        )
        .unwrap();
        assert_eq!(r.fact, slice[0]);
        assert!((r.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_smaller_rendering() {
        let slice = [t("palau", "locatedIn", "zed"), t("palau", "locatedIn", "abc")];
        let r = project(&["nothing alike".into()], &slice, &ExactTranslator::new(), &countries_schema())
            .unwrap();
        assert_eq!(r.fact, slice[1]);
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn relation_token_dominates() {
        let slice = [t("Joseph", "brother", "Dale"), t("Joseph", "uncle", "Sam")];
        let r = project(
            &["Joseph's brother is ?ENT".into()],
            &slice,
            &HashTranslator::default(),
            &kinship_schema(),
        )
        .unwrap();
        assert_eq!(r.fact, slice[0]);
    }

    #[test]
    fn empty_inputs() {
        let schema = countries_schema();
        let tr = HashTranslator::default();
        assert!(matches!(project(&["x".into()], &[], &tr, &schema), Err(BackendError::EmptySlice)));
        let slice = [t("a", "locatedIn", "b")];
        assert!(matches!(project(&[], &slice, &tr, &schema), Err(BackendError::NoCandidates)));
        assert!(matches!(project(&["  ".into()], &slice, &tr, &schema), Err(BackendError::NoCandidates)));
    }

    #[test]
    fn step_prefix_is_stripped() {
        assert_eq!(normalize_candidate("Step 3: a b c\nStep 4: d"), "a b c");
        assert_eq!(normalize_candidate("  \n x y "), "x y");
        assert_eq!(normalize_candidate("Stepmother is here"), "Stepmother is here");
    }
}
