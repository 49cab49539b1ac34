use std::collections::{BTreeMap, BTreeSet};

use super::ids::{Cardinality, IdSetSpec};
use super::signature::{Signature, SignatureConflict};
use super::ModelError;

/// The subclass relation: direct pairs plus their reflexive-transitive closure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InheritanceRelation {
    classes: BTreeSet<String>,
    direct: BTreeSet<(String, String)>,
    closure: BTreeSet<(String, String)>,
}

impl InheritanceRelation {
    /// Closes `direct` (pairs `(sub, super)`) over `classes`.
    pub fn new(
        classes: impl IntoIterator<Item = String>,
        direct: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        let mut classes: BTreeSet<String> = classes.into_iter().collect();
        let direct: BTreeSet<(String, String)> = direct.into_iter().collect();
        for (a, b) in &direct {
            classes.insert(a.clone());
            classes.insert(b.clone());
        }
        let mut supers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &direct {
            supers.entry(a).or_default().push(b);
        }
        let mut closure = BTreeSet::new();
        for c in &classes {
            let mut stack = vec![c.as_str()];
            let mut seen = BTreeSet::new();
            while let Some(x) = stack.pop() {
                if !seen.insert(x) {
                    continue;
                }
                closure.insert((c.clone(), x.to_string()));
                stack.extend(supers.get(x).into_iter().flatten().copied());
            }
        }
        InheritanceRelation {
            classes,
            direct,
            closure,
        }
    }

    /// Re-closes the closure itself; the identity on a closed relation.
    pub fn close(&self) -> Self {
        let mut r = InheritanceRelation::new(self.classes.iter().cloned(), self.closure.iter().cloned());
        r.direct = self.direct.clone();
        r
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn direct(&self) -> &BTreeSet<(String, String)> {
        &self.direct
    }

    pub fn closure(&self) -> &BTreeSet<(String, String)> {
        &self.closure
    }

    /// `c ⊑ d`.
    pub fn is_subclass(&self, c: &str, d: &str) -> Result<bool, ModelError> {
        for x in [c, d] {
            if !self.classes.contains(x) {
                return Err(ModelError::UnknownClass(x.to_string()));
            }
        }
        Ok(self.closure.contains(&(c.to_string(), d.to_string())))
    }

    /// All `d` with `c ⊑ d`, including `c`.
    pub fn superclasses<'a>(&'a self, c: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.closure
            .iter()
            .filter(move |(a, _)| a == c)
            .map(|(_, b)| b.as_str())
    }

    /// All `d` with `d ⊑ c`, including `c`.
    pub fn subclasses<'a>(&'a self, c: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.closure
            .iter()
            .filter(move |(_, b)| b == c)
            .map(|(a, _)| a.as_str())
    }

    /// Classes lying on a generalization cycle.
    pub fn cyclic_classes(&self) -> BTreeSet<String> {
        self.closure
            .iter()
            .filter(|(a, b)| a != b && self.closure.contains(&(b.clone(), a.clone())))
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.cyclic_classes().is_empty()
    }
}

/// Declared signatures and abstractness of every class, plus inheritance.
#[derive(Debug, Clone, Default)]
pub struct ClassHierarchy {
    pub declared: BTreeMap<String, Signature>,
    pub abstract_classes: BTreeSet<String>,
    pub inheritance: InheritanceRelation,
}

impl ClassHierarchy {
    pub fn contains(&self, c: &str) -> bool {
        self.declared.contains_key(c)
    }

    pub fn is_subclass(&self, c: &str, d: &str) -> Result<bool, ModelError> {
        self.inheritance.is_subclass(c, d)
    }

    /// Union of the declared members along all superclasses of `c`.
    pub fn effective_signature(&self, c: &str) -> Result<Signature, ModelError> {
        let own = self
            .declared
            .get(c)
            .ok_or_else(|| ModelError::UnknownClass(c.to_string()))?;
        let mut sig = own.clone();
        let mut supers: Vec<&str> = self.inheritance.superclasses(c).filter(|s| *s != c).collect();
        supers.sort();
        for s in supers {
            if let Some(decl) = self.declared.get(s) {
                sig.merge(decl, c).map_err(|SignatureConflict { name, class }| {
                    ModelError::SignatureConflict { name, class }
                })?;
            }
        }
        Ok(sig)
    }

    /// `ID_c` (subclasses excluded) or, when `polymorphic`, `{id | class(id) ⊑ c}`.
    pub fn ids_of(&self, c: &str, polymorphic: bool) -> Result<IdSetSpec, ModelError> {
        if !self.contains(c) {
            return Err(ModelError::UnknownClass(c.to_string()));
        }
        let classes: BTreeSet<String> = if polymorphic {
            self.inheritance
                .subclasses(c)
                .filter(|s| !self.abstract_classes.contains(*s))
                .map(str::to_string)
                .collect()
        } else if self.abstract_classes.contains(c) {
            BTreeSet::new()
        } else {
            [c.to_string()].into()
        };
        Ok(if classes.is_empty() {
            IdSetSpec::Empty
        } else {
            IdSetSpec::OfClasses(classes)
        })
    }

    pub fn id_cardinality(&self, c: &str) -> Result<Cardinality, ModelError> {
        Ok(self.ids_of(c, false)?.cardinality())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::signature::{AttrType, MethodSig, ValueType};
    use crate::model::ids::ObjectId;

    fn rel(pairs: &[(&str, &str)]) -> InheritanceRelation {
        InheritanceRelation::new(
            ["A", "B", "C"].map(String::from),
            pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())),
        )
    }

    #[test]
    fn subclass_queries() {
        let r = rel(&[("B", "A"), ("C", "B")]);
        assert!(r.is_subclass("A", "A").unwrap());
        assert!(r.is_subclass("C", "A").unwrap());
        assert!(!r.is_subclass("A", "C").unwrap());
        assert_eq!(r.is_subclass("A", "Z"), Err(ModelError::UnknownClass("Z".into())));
        assert!(r.is_acyclic());
    }

    #[test]
    fn closing_twice_is_identity() {
        let r = rel(&[("B", "A"), ("C", "B")]);
        assert_eq!(r.close(), r);
        assert_eq!(r.close().close(), r.close());
    }

    #[test]
    fn cycles_detected() {
        let r = rel(&[("B", "A"), ("A", "B")]);
        assert_eq!(r.cyclic_classes(), ["A".to_string(), "B".to_string()].into());
    }

    fn hierarchy() -> ClassHierarchy {
        let mut a = Signature::default();
        a.attributes.insert("x".into(), AttrType::plain(ValueType::Int));
        let mut b = Signature::default();
        b.methods.insert(
            "f".into(),
            MethodSig {
                params: vec![],
                result: None,
            },
        );
        ClassHierarchy {
            declared: [("A".to_string(), a), ("B".to_string(), b), ("C".to_string(), Signature::default())].into(),
            abstract_classes: ["A".to_string()].into(),
            inheritance: rel(&[("B", "A")]),
        }
    }

    #[test]
    fn effective_signatures() {
        let h = hierarchy();
        assert_eq!(h.effective_signature("C").unwrap(), Signature::default());
        let b = h.effective_signature("B").unwrap();
        assert!(b.attributes.contains_key("x") && b.methods.contains_key("f"));
        assert_eq!(b.attributes.len() + b.methods.len(), 2);

        let mut h = h;
        h.declared
            .get_mut("B")
            .unwrap()
            .attributes
            .insert("x".into(), AttrType::plain(ValueType::Str));
        assert_eq!(
            h.effective_signature("B"),
            Err(ModelError::SignatureConflict {
                name: "x".into(),
                class: "B".into()
            })
        );
    }

    #[test]
    fn id_sets() {
        let h = hierarchy();
        assert_eq!(h.ids_of("A", false).unwrap(), IdSetSpec::Empty);
        assert_eq!(h.id_cardinality("A").unwrap(), Cardinality::Zero);
        let poly = h.ids_of("A", true).unwrap();
        assert!(poly.includes(&h.ids_of("B", false).unwrap()));
        assert!(poly.contains(&ObjectId::initial("B", 3)));
        let c = h.ids_of("C", false).unwrap();
        assert_eq!(c.cardinality(), Cardinality::CountablyInfinite);
        assert!((0..50).all(|n| c.contains(&ObjectId::initial("C", n))));
        assert!(!c.contains(&ObjectId::initial("B", 0)));
        assert!(h.ids_of("Nope", true).is_err());
    }
}
