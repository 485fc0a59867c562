//! Line-delimited fact files.
//!
//! Each non-blank line is either `subject<TAB>relation<TAB>object` or a JSON
//! object `{"s": .., "p": .., "o": ..}`. Lines starting with `#` are comments.
//! Instance files may also carry one `{"query": {"s": .., "p": .., "o": ..}}`
//! record.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::Deserialize;

use super::{KbError, KnowledgeBase, Triple};

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonRecord {
    Query { query: Triple },
    Fact(Triple),
}

enum Record {
    Fact(Triple),
    Query(Triple),
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<Record>, KbError> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.trim_start().starts_with('#') {
        return Ok(None);
    }
    let at = |e: KbError| KbError::AtLine {
        line: lineno,
        source: Box::new(e),
    };
    if line.trim_start().starts_with('{') {
        let rec: JsonRecord =
            serde_json::from_str(line).map_err(|e| at(KbError::Json(e.to_string())))?;
        return Ok(Some(match rec {
            JsonRecord::Query { query } => Record::Query(query),
            JsonRecord::Fact(t) => Record::Fact(t),
        }));
    }
    Triple::from_tsv(line).map(|t| Some(Record::Fact(t))).map_err(at)
}

/// Reads facts; query records are rejected.
pub fn read_facts<R: BufRead>(reader: R) -> Result<KnowledgeBase, KbError> {
    let (query, kb) = read_instance(reader)?;
    if query.is_some() {
        return Err(KbError::UnexpectedQuery);
    }
    Ok(kb)
}

/// Reads an instance file: facts plus at most one query record.
pub fn read_instance<R: BufRead>(reader: R) -> Result<(Option<Triple>, KnowledgeBase), KbError> {
    let mut kb = KnowledgeBase::new();
    let mut query = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| KbError::Io(e.to_string()))?;
        match parse_line(&line, i + 1)? {
            None => {}
            Some(Record::Fact(t)) => {
                kb.insert(t);
            }
            Some(Record::Query(q)) if query.replace(q).is_some() => {
                return Err(KbError::AtLine {
                    line: i + 1,
                    source: Box::new(KbError::UnexpectedQuery),
                });
            }
            Some(Record::Query(_)) => {}
        }
    }
    Ok((query, kb))
}

pub fn load_facts(path: &Path) -> Result<KnowledgeBase, KbError> {
    let file = std::fs::File::open(path).map_err(|e| KbError::io(path, e))?;
    read_facts(std::io::BufReader::new(file))
}

pub fn load_instance(path: &Path) -> Result<(Option<Triple>, KnowledgeBase), KbError> {
    let file = std::fs::File::open(path).map_err(|e| KbError::io(path, e))?;
    read_instance(std::io::BufReader::new(file))
}

pub fn write_tsv<W: Write>(facts: &[Triple], mut out: W) -> std::io::Result<()> {
    for f in facts {
        writeln!(out, "{}", f.to_tsv())?;
    }
    Ok(())
}

pub fn write_instance<W: Write>(query: &Triple, facts: &[Triple], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::json!({ "query": query })
    )?;
    for f in facts {
        writeln!(out, "{}", serde_json::to_string(f).expect("triple serializes"))?;
    }
    Ok(())
}
