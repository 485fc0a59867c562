use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::symbol::Symbol;
use super::KbError;

macro_rules! interned_name {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Symbol);

        impl $name {
            /// Interns `text` after trimming surrounding whitespace.
            pub fn new(text: &str) -> Result<Self, KbError> {
                let trimmed = text.trim();
                if trimmed.is_empty() {
                    return Err(KbError::EmptyName($what));
                }
                Ok(Self(Symbol::intern(trimmed)))
            }

            pub fn as_str(self) -> &'static str {
                self.0.as_str()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), self.0.as_str())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.0.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                $name::new(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

interned_name!(
    /// Interned entity name (country, person, region, ...).
    EntityId,
    "entity"
);
interned_name!(
    /// Interned relation name such as `locatedIn` or `daughter`.
    RelationId,
    "relation"
);

/// A `(subject, relation, object)` predicate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    #[serde(rename = "s")]
    pub subject: EntityId,
    #[serde(rename = "p")]
    pub relation: RelationId,
    #[serde(rename = "o")]
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, relation: RelationId, object: EntityId) -> Self {
        Self {
            subject,
            relation,
            object,
        }
    }

    /// Builds a triple from raw strings, interning each part.
    pub fn from_strs(subject: &str, relation: &str, object: &str) -> Result<Self, KbError> {
        Ok(Self::new(
            EntityId::new(subject)?,
            RelationId::new(relation)?,
            EntityId::new(object)?,
        ))
    }

    /// Tab-separated encoding used by fact files and rule libraries.
    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}", self.subject, self.relation, self.object)
    }

    pub fn from_tsv(line: &str) -> Result<Self, KbError> {
        let parts: Vec<&str> = line.split('\t').collect();
        match parts.as_slice() {
            [s, p, o] => Self::from_strs(s, p, o),
            _ => Err(KbError::MalformedRecord(line.to_string())),
        }
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

/// Returns the index of the first link where `steps[i].object != steps[i + 1].subject`.
pub fn chain_break(steps: &[Triple]) -> Option<usize> {
    steps
        .windows(2)
        .position(|pair| pair[0].object != pair[1].subject)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_trimmed_and_case_sensitive() {
        let a = EntityId::new("  Ashley ").unwrap();
        assert_eq!(a.as_str(), "Ashley");
        assert_ne!(a, EntityId::new("ashley").unwrap());
        assert!(EntityId::new("   ").is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let t = Triple::from_strs("palau", "locatedIn", "micronesia").unwrap();
        assert_eq!(Triple::from_tsv(&t.to_tsv()).unwrap(), t);
        assert!(Triple::from_tsv("a\tb").is_err());
    }

    #[test]
    fn json_uses_short_keys() {
        let t = Triple::from_strs("Ashley", "daughter", "Lillian").unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"s":"Ashley","p":"daughter","o":"Lillian"}"#);
    }

    #[test]
    fn chain_break_finds_first_gap() {
        let a = Triple::from_strs("a", "r", "b").unwrap();
        let b = Triple::from_strs("b", "r", "c").unwrap();
        let c = Triple::from_strs("x", "r", "y").unwrap();
        assert_eq!(chain_break(&[a, b]), None);
        assert_eq!(chain_break(&[a, b, c]), Some(1));
    }
}
