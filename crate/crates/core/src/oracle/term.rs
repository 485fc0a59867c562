use std::collections::BTreeMap;
use std::fmt;

use crate::kb::{EntityId, KbError, RelationId, Triple, VerbalizationSchema};

use super::OracleError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(EntityId),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    /// Tab-encoding form: variables as `?A`, constants verbatim.
    pub fn encode(&self) -> String {
        match self {
            Term::Var(v) => format!("?{v}"),
            Term::Const(e) => e.as_str().to_string(),
        }
    }

    pub fn decode(text: &str) -> Result<Self, KbError> {
        match text.trim().strip_prefix('?') {
            Some(v) if !v.is_empty() => Ok(Term::Var(v.to_string())),
            _ => Ok(Term::Const(EntityId::new(text)?)),
        }
    }

    /// Text used when rendering the term into a prompt.
    pub fn surface(&self) -> &str {
        match self {
            Term::Var(v) => v,
            Term::Const(e) => e.as_str(),
        }
    }

    fn resolve(&self, bindings: &Bindings) -> Option<EntityId> {
        match self {
            Term::Const(e) => Some(*e),
            Term::Var(v) => bindings.get(v).copied(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.surface())
    }
}

pub type Bindings = BTreeMap<String, EntityId>;

/// A binary atom `relation(arg0, arg1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: RelationId,
    pub args: [Term; 2],
}

impl Atom {
    pub fn new(relation: RelationId, subject: Term, object: Term) -> Self {
        Self {
            relation,
            args: [subject, object],
        }
    }

    pub fn encode(&self) -> String {
        format!(
            "{}\t{}\t{}",
            self.args[0].encode(),
            self.relation,
            self.args[1].encode()
        )
    }

    pub fn decode(text: &str) -> Result<Self, KbError> {
        let parts: Vec<&str> = text.split('\t').collect();
        match parts.as_slice() {
            [s, p, o] => Ok(Atom::new(RelationId::new(p)?, Term::decode(s)?, Term::decode(o)?)),
            _ => Err(KbError::MalformedRecord(text.to_string())),
        }
    }

    pub fn render(&self, schema: &VerbalizationSchema) -> Result<String, KbError> {
        schema.render(self.args[0].surface(), self.relation, self.args[1].surface())
    }

    /// Grounds the atom; `None` when a variable is unbound.
    pub fn ground(&self, bindings: &Bindings) -> Option<Triple> {
        Some(Triple::new(
            self.args[0].resolve(bindings)?,
            self.relation,
            self.args[1].resolve(bindings)?,
        ))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.args[0], self.args[1])
    }
}

/// Matches `atom` against a ground fact, extending `bindings`.
///
/// Returns the minimal extension that makes the atom equal to `fact`, or `None`
/// on a relation mismatch, a constant clash, or a variable already bound to a
/// different entity. The input bindings are never modified.
pub fn unify(atom: &Atom, fact: &Triple, bindings: &Bindings) -> Option<Bindings> {
    if atom.relation != fact.relation {
        return None;
    }
    let mut out = bindings.clone();
    for (term, value) in atom.args.iter().zip([fact.subject, fact.object]) {
        match term {
            Term::Const(c) if *c != value => return None,
            Term::Const(_) => {}
            Term::Var(name) => match out.get(name) {
                Some(bound) if *bound != value => return None,
                Some(_) => {}
                None => {
                    out.insert(name.clone(), value);
                }
            },
        }
    }
    Some(out)
}

/// A chain-shaped Horn rule `head(X0, Xn) <- b1(X0, X1), ..., bn(Xn-1, Xn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornRule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

/// Variable-abstracted proof demonstration.
pub type AbstractRule = HornRule;

impl HornRule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Result<Self, OracleError> {
        let rule = Self { head, body };
        rule.check_chain()?;
        Ok(rule)
    }

    fn check_chain(&self) -> Result<(), OracleError> {
        let broken = || OracleError::NotAChainRule(self.to_string());
        let first = self.body.first().ok_or_else(broken)?;
        let last = self.body.last().ok_or_else(broken)?;
        if first.args[0] != self.head.args[0] || last.args[1] != self.head.args[1] {
            return Err(broken());
        }
        if self.body.windows(2).any(|w| w[0].args[1] != w[1].args[0]) {
            return Err(broken());
        }
        Ok(())
    }

    /// Substitutes bindings into head and body.
    pub fn ground(&self, bindings: &Bindings) -> Option<(Triple, Vec<Triple>)> {
        let head = self.head.ground(bindings)?;
        let body = self
            .body
            .iter()
            .map(|a| a.ground(bindings))
            .collect::<Option<Vec<_>>>()?;
        Some((head, body))
    }

    /// Parses `head :- b1, b2` using [`Atom`]'s `relation(A, B)` display form.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let bad = || OracleError::RuleSyntax(text.to_string());
        let (head, body) = text.split_once(":-").ok_or_else(bad)?;
        let parse_atom = |s: &str| -> Result<Atom, OracleError> {
            let s = s.trim();
            let (rel, rest) = s.split_once('(').ok_or_else(bad)?;
            let args = rest.strip_suffix(')').ok_or_else(bad)?;
            let (a, b) = args.split_once(',').ok_or_else(bad)?;
            let term = |t: &str| {
                let t = t.trim();
                if t.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                    Ok(Term::var(t))
                } else {
                    EntityId::new(t).map(Term::Const).map_err(|_| bad())
                }
            };
            Ok(Atom::new(
                RelationId::new(rel).map_err(|_| bad())?,
                term(a)?,
                term(b)?,
            ))
        };
        let head = parse_atom(head)?;
        let mut atoms = Vec::new();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (i, c) in body.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    atoms.push(parse_atom(&body[start..i])?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        atoms.push(parse_atom(&body[start..])?);
        HornRule::new(head, atoms)
    }
}

impl fmt::Display for HornRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.head)?;
        for (i, atom) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}
