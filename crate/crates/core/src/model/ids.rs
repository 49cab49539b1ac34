//! Object identifiers and the creatable-identifier partition.
//!
//! An identifier is a class name plus a provenance tag. Objects of the initial
//! snapshot carry a one-element tag `[k]` (document order). The `n`-th object
//! created by an object with tag `t` gets tag `t ++ [n]`. The tag alone is
//! unique, which makes the creatable sets of distinct objects disjoint and
//! keeps initially active objects out of every creatable set.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId {
    class: String,
    tag: Vec<u32>,
}

impl ObjectId {
    /// Identifier of the `ordinal`-th object of an initial snapshot.
    pub fn initial(class: impl Into<String>, ordinal: u32) -> Self {
        ObjectId {
            class: class.into(),
            tag: vec![ordinal],
        }
    }

    /// The `n`-th identifier drawn from `creator`'s creatables.
    pub fn created_by(creator: &ObjectId, n: u32, class: impl Into<String>) -> Self {
        let mut tag = creator.tag.clone();
        tag.push(n);
        ObjectId {
            class: class.into(),
            tag,
        }
    }

    /// Placeholder for the system environment in open (single-object) views.
    pub fn environment() -> Self {
        ObjectId {
            class: "$env".into(),
            tag: Vec::new(),
        }
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn tag(&self) -> &[u32] {
        &self.tag
    }

    pub fn is_initial(&self) -> bool {
        self.tag.len() == 1
    }

    /// The object that created this one, up to its class, which the tag does
    /// not record.
    pub fn creator_tag(&self) -> Option<&[u32]> {
        (self.tag.len() >= 2).then(|| &self.tag[..self.tag.len() - 1])
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#", self.class)?;
        for (i, t) in self.tag.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Serialize for ObjectId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Zero,
    CountablyInfinite,
}

/// Symbolic description of a (usually infinite) set of identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdSetSpec {
    Empty,
    /// `{ id | class(id) ∈ classes }`.
    OfClasses(BTreeSet<String>),
    /// Identifiers `creator ++ [n]`, `n ∈ ℕ`, of any class.
    Creatables { creator: Vec<u32> },
}

impl IdSetSpec {
    pub fn contains(&self, id: &ObjectId) -> bool {
        match self {
            IdSetSpec::Empty => false,
            IdSetSpec::OfClasses(cs) => cs.contains(id.class()),
            IdSetSpec::Creatables { creator } => id.creator_tag() == Some(creator.as_slice()),
        }
    }

    pub fn cardinality(&self) -> Cardinality {
        match self {
            IdSetSpec::Empty => Cardinality::Zero,
            IdSetSpec::OfClasses(cs) if cs.is_empty() => Cardinality::Zero,
            _ => Cardinality::CountablyInfinite,
        }
    }

    /// `true` only when the two sets are provably disjoint.
    pub fn is_disjoint(&self, other: &IdSetSpec) -> bool {
        use IdSetSpec::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => true,
            (OfClasses(a), OfClasses(b)) => a.is_disjoint(b),
            (Creatables { creator: a }, Creatables { creator: b }) => a != b,
            _ => false,
        }
    }

    /// `true` when `self ⊇ other`, decided symbolically.
    pub fn includes(&self, other: &IdSetSpec) -> bool {
        use IdSetSpec::*;
        match (self, other) {
            (_, Empty) => true,
            (OfClasses(a), OfClasses(b)) => b.is_subset(a),
            (Creatables { creator: a }, Creatables { creator: b }) => a == b,
            _ => false,
        }
    }
}

/// The creatable identifiers of `id`.
pub fn creatables(id: &ObjectId) -> IdSetSpec {
    IdSetSpec::Creatables {
        creator: id.tag.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creatables_pairwise_disjoint() {
        let a = ObjectId::initial("C", 0);
        let b = ObjectId::initial("C", 1);
        assert!(creatables(&a).is_disjoint(&creatables(&b)));
        let a0 = ObjectId::created_by(&a, 0, "D");
        assert!(creatables(&a).contains(&a0));
        assert!(!creatables(&b).contains(&a0));
        assert!(creatables(&a0).is_disjoint(&creatables(&a)));
    }

    #[test]
    fn initially_active_not_creatable() {
        let x = ObjectId::initial("C", 0);
        for k in 0..5 {
            let init = ObjectId::initial("D", k);
            assert!(!creatables(&x).contains(&init));
            let child = ObjectId::created_by(&x, k, "D");
            assert!(!creatables(&child).contains(&init));
        }
    }

    #[test]
    fn tagging_is_injective() {
        let roots: Vec<ObjectId> = (0..4).map(|k| ObjectId::initial("C", k)).collect();
        let mut seen = BTreeSet::new();
        for r in &roots {
            for n in 0..6 {
                let child = ObjectId::created_by(r, n, "C");
                assert!(seen.insert(child.tag().to_vec()));
                for m in 0..3 {
                    assert!(seen.insert(ObjectId::created_by(&child, m, "C").tag().to_vec()));
                }
            }
        }
    }

    #[test]
    fn display() {
        let a = ObjectId::initial("Branch", 1);
        assert_eq!(a.to_string(), "Branch#1");
        assert_eq!(ObjectId::created_by(&a, 0, "Item").to_string(), "Item#1.0");
    }
}
