use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ValueType {
    Int,
    Bool,
    Str,
    Class(String),
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Int => write!(f, "int"),
            ValueType::Bool => write!(f, "bool"),
            ValueType::Str => write!(f, "string"),
            ValueType::Class(c) => write!(f, "{c}"),
        }
    }
}

/// Attribute type plus an optional finite value domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttrType {
    pub ty: ValueType,
    pub domain: Option<Vec<Value>>,
}

impl AttrType {
    pub fn plain(ty: ValueType) -> Self {
        AttrType { ty, domain: None }
    }

    /// Finite domain used when enumerating valuations: the declared one, or
    /// `{false, true}` for booleans.
    pub fn finite_domain(&self) -> Option<Vec<Value>> {
        match (&self.domain, &self.ty) {
            (Some(d), _) => Some(d.clone()),
            (None, ValueType::Bool) => Some(vec![Value::Bool(false), Value::Bool(true)]),
            _ => None,
        }
    }

    /// Value an attribute holds when nothing else is known.
    pub fn default_value(&self) -> Value {
        if let Some(first) = self.domain.as_ref().and_then(|d| d.first()) {
            return first.clone();
        }
        match self.ty {
            ValueType::Int => Value::Int(0),
            ValueType::Bool => Value::Bool(false),
            ValueType::Str => Value::Str(String::new()),
            ValueType::Class(_) => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodSig {
    pub params: Vec<ValueType>,
    pub result: Option<ValueType>,
}

/// Attributes and methods of a class.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Signature {
    pub attributes: BTreeMap<String, AttrType>,
    pub methods: BTreeMap<String, MethodSig>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("member `{name}` of class {class} conflicts with an inherited or sibling declaration")]
pub struct SignatureConflict {
    pub name: String,
    pub class: String,
}

impl Signature {
    /// `self ⊆ other` as member maps.
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.attributes
            .iter()
            .all(|(k, v)| other.attributes.get(k) == Some(v))
            && self.methods.iter().all(|(k, v)| other.methods.get(k) == Some(v))
    }

    /// Members of `self` that `other` lacks or declares differently.
    pub fn missing_from(&self, other: &Signature) -> Vec<String> {
        let mut out: Vec<String> = self
            .attributes
            .iter()
            .filter(|(k, v)| other.attributes.get(*k) != Some(v))
            .map(|(k, _)| k.clone())
            .collect();
        out.extend(
            self.methods
                .iter()
                .filter(|(k, v)| other.methods.get(*k) != Some(v))
                .map(|(k, _)| k.clone()),
        );
        out
    }

    /// Map union; a name bound to two different declarations is a conflict.
    pub fn merge(&mut self, other: &Signature, class: &str) -> Result<(), SignatureConflict> {
        let conflict = |name: &str| SignatureConflict {
            name: name.to_string(),
            class: class.to_string(),
        };
        for (k, v) in &other.attributes {
            if self.methods.contains_key(k) {
                return Err(conflict(k));
            }
            match self.attributes.get(k) {
                Some(existing) if existing != v => return Err(conflict(k)),
                _ => {
                    self.attributes.insert(k.clone(), v.clone());
                }
            }
        }
        for (k, v) in &other.methods {
            if self.attributes.contains_key(k) {
                return Err(conflict(k));
            }
            match self.methods.get(k) {
                Some(existing) if existing != v => return Err(conflict(k)),
                _ => {
                    self.methods.insert(k.clone(), v.clone());
                }
            }
        }
        Ok(())
    }
}
