use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ids::ObjectId;
use super::value::Value;

/// Flat diagram-state label: the active leaf of each concurrent region, in
/// document order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Label(pub Vec<String>);

impl Label {
    pub fn single(name: impl Into<String>) -> Self {
        Label(vec![name.into()])
    }

    pub fn contains(&self, leaf: &str) -> bool {
        self.0.iter().any(|l| l == leaf)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [one] => write!(f, "{one}"),
            many => write!(f, "({})", many.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ObjectState {
    pub control: Label,
    pub valuation: BTreeMap<String, Value>,
    /// Link-set key (`assoc.TargetClass`) to linked objects.
    pub links: BTreeMap<String, BTreeSet<ObjectId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct SystemState {
    pub alive: BTreeMap<ObjectId, ObjectState>,
    pub clock: u64,
}
