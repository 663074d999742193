//! Interned symbol names.
//!
//! Every scalar symbol in the engine (coordinates, fiber coordinates, the
//! flow time parameter, free constants such as a mass parameter) is a
//! [`Symbol`]. Symbols compare by name, so canonical orderings are stable
//! across runs regardless of interning order.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// An interned, immutable symbol name.
#[derive(Clone)]
pub struct Symbol(Arc<str>);

fn registry() -> &'static Mutex<HashMap<String, Arc<str>>> {
    static REGISTRY: OnceLock<Mutex<HashMap<String, Arc<str>>>> = OnceLock::new();
    REGISTRY.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Symbol {
    /// Interns `name` and returns the shared symbol.
    pub fn new(name: &str) -> Symbol {
        let mut map = registry().lock().expect("symbol registry poisoned");
        if let Some(existing) = map.get(name) {
            return Symbol(existing.clone());
        }
        let arc: Arc<str> = Arc::from(name);
        map.insert(name.to_owned(), arc.clone());
        Symbol(arc)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Symbol {}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            std::cmp::Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl std::hash::Hash for Symbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(name: &str) -> Symbol {
        Symbol::new(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_dedups() {
        let a = Symbol::new("x");
        let b = Symbol::new("x");
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_eq!(a, b);
    }

    #[test]
    fn ordering_is_by_name() {
        let y = Symbol::new("y");
        let x = Symbol::new("x");
        assert!(x < y);
        assert!(Symbol::new("p1") < Symbol::new("p2"));
    }
}
