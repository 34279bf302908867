//! Interned identifiers.
//!
//! Registers, locations and thread ids are short strings that get compared
//! and hashed constantly during exploration, so they are interned once and
//! passed around as a pointer. Equality and hashing use the pointer, ordering
//! uses the string so that every sorted output is stable across runs.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy)]
pub struct Name(&'static str);

fn table() -> &'static Mutex<HashSet<&'static str>> {
    static TABLE: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashSet::new()))
}

impl Name {
    pub fn new(s: &str) -> Name {
        let mut t = table().lock().expect("name table poisoned");
        if let Some(existing) = t.get(s) {
            return Name(existing);
        }
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        t.insert(leaked);
        Name(leaked)
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Name) -> bool {
        std::ptr::eq(self.0.as_ptr(), other.0.as_ptr())
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0.as_ptr() as usize).hash(state)
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Name) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Name) -> std::cmp::Ordering {
        if self == other {
            std::cmp::Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl serde::Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.0)
    }
}

/// Register name.
pub type Reg = Name;
/// Shared memory location.
pub type Loc = Name;
/// Thread identifier.
pub type Tid = Name;
/// Values are unbounded machine integers; booleans are 1 and 0.
pub type Val = i64;

/// The thread that owns initialization writes and forks the top-level threads.
pub fn t0() -> Tid {
    Name::new("t0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Name::new("abc");
        let b = Name::new(&String::from("abc"));
        assert_eq!(a, b);
        assert!(std::ptr::eq(a.as_str(), b.as_str()));
        assert!(Name::new("a") < Name::new("b"));
    }
}
