//! Process-wide string interning.
//!
//! Every distinct name is leaked exactly once, so a [`Symbol`] is a thin
//! `&'static str` whose identity is its address. Equality and hashing use the
//! address; ordering uses the text, which keeps sorted collections stable
//! across runs regardless of interning order.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

fn pool() -> &'static Mutex<HashSet<&'static str>> {
    static POOL: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    POOL.get_or_init(|| Mutex::new(HashSet::new()))
}

#[derive(Clone, Copy)]
pub struct Symbol(&'static str);

impl Symbol {
    pub fn intern(text: &str) -> Symbol {
        let mut pool = pool().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = pool.get(text) {
            return Symbol(existing);
        }
        let leaked: &'static str = Box::leak(text.to_owned().into_boxed_str());
        pool.insert(leaked);
        Symbol(leaked)
    }

    pub fn as_str(self) -> &'static str {
        self.0
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0.as_ptr() as usize).hash(state);
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_injective() {
        let a = Symbol::intern("palau");
        let b = Symbol::intern(&String::from("palau"));
        let c = Symbol::intern("Palau");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_str(), "palau");
    }

    #[test]
    fn ordering_follows_text() {
        let z = Symbol::intern("zeta-order");
        let a = Symbol::intern("alpha-order");
        assert!(a < z);
    }
}
