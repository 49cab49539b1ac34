//! Integrity rules over one system state.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::{AssocKind, Pos};
use crate::elaborate::{LinkEnd, SnapshotState, StaticModel};
use crate::model::{Env, ObjectId, ObjectState, StateTransitionSystem, SystemState, Value};

use super::catalog::Rule;
use super::violation::{normalize, Violation};

/// Names and source positions for the objects of a state; objects created at
/// run time fall back to their identifier and an unknown position.
#[derive(Debug, Clone, Copy, Default)]
pub struct Naming<'a> {
    pub snapshot: Option<&'a SnapshotState>,
}

impl Naming<'_> {
    fn name(&self, id: &ObjectId) -> String {
        self.snapshot
            .and_then(|s| s.name_of(id))
            .map(str::to_string)
            .unwrap_or_else(|| id.to_string())
    }

    fn pos(&self, id: &ObjectId) -> Pos {
        self.snapshot
            .and_then(|s| s.positions.get(id).copied())
            .unwrap_or_default()
    }
}

struct ObjEnv<'a> {
    id: &'a ObjectId,
    obj: &'a ObjectState,
}

impl Env for ObjEnv<'_> {
    fn attr(&self, name: &str) -> Option<Value> {
        self.obj.valuation.get(name).cloned()
    }
    fn link_count(&self, key: &str) -> Option<i64> {
        self.obj.links.get(key).map(|s| s.len() as i64)
    }
    fn self_id(&self) -> Option<Value> {
        Some(Value::Ref(self.id.clone()))
    }
}

/// Ends of `other` belonging to the same association as `end` and pointing
/// back at objects of `class`.
fn reverse_ends<'m>(model: &'m StaticModel, end: &LinkEnd, class: &str, other: &str) -> Vec<&'m LinkEnd> {
    model
        .link_ends_of(other)
        .filter(|e| e.assoc == end.assoc && model.is_subclass(class, &e.target_class))
        .collect()
}

/// Aggregates of each part, per composition association, gathered from both
/// sides of the links.
fn aggregates(model: &StaticModel, state: &SystemState) -> BTreeMap<(ObjectId, String), BTreeSet<ObjectId>> {
    let mut out: BTreeMap<(ObjectId, String), BTreeSet<ObjectId>> = BTreeMap::new();
    for (id, obj) in &state.alive {
        for e in model.link_ends_of(id.class()) {
            if e.kind != AssocKind::Composition {
                continue;
            }
            let Some(linked) = obj.links.get(&e.key) else { continue };
            for other in linked {
                let (part, whole) = if e.toward_aggregate { (id, other) } else { (other, id) };
                out.entry((part.clone(), e.assoc.clone())).or_default().insert(whole.clone());
            }
        }
    }
    out
}

/// Multiplicity, link symmetry, composition sharing and user constraints.
pub fn check_state(state: &SystemState, model: &StaticModel, naming: Naming<'_>) -> Vec<Violation> {
    let mut out = Vec::new();
    let shared: BTreeMap<(ObjectId, String), BTreeSet<ObjectId>> = aggregates(model, state)
        .into_iter()
        .filter(|(_, wholes)| wholes.len() > 1)
        .collect();
    for ((part, assoc), wholes) in &shared {
        let names: Vec<String> = wholes.iter().map(|w| naming.name(w)).collect();
        out.push(Violation::new(
            Rule::D003,
            naming.name(part),
            naming.pos(part),
            format!("part {} is shared by aggregates {} under `{assoc}`", naming.name(part), names.join(", ")),
        ));
    }
    for (id, obj) in &state.alive {
        let name = naming.name(id);
        let pos = naming.pos(id);
        for e in model.link_ends_of(id.class()) {
            let linked = obj.links.get(&e.key).cloned().unwrap_or_default();
            let sharing = e.toward_aggregate && shared.contains_key(&(id.clone(), e.assoc.clone()));
            if !sharing && !e.mult.admits(linked.len()) {
                out.push(Violation::new(
                    Rule::D001,
                    name.clone(),
                    pos,
                    format!("{name} has {} `{}` links; multiplicity is {}", linked.len(), e.key, e.mult),
                ));
            }
            for other in &linked {
                let back = state.alive.get(other).is_some_and(|o| {
                    reverse_ends(model, e, id.class(), other.class())
                        .iter()
                        .any(|r| o.links.get(&r.key).is_some_and(|s| s.contains(id)))
                });
                if !back {
                    out.push(Violation::new(
                        Rule::D002,
                        name.clone(),
                        pos,
                        format!("{name} lists {} under `{}` but not vice versa", naming.name(other), e.key),
                    ));
                }
            }
        }
        for k in &model.constraints {
            if !model.is_subclass(id.class(), &k.class) {
                continue;
            }
            if k.predicate.holds(&ObjEnv { id, obj }) == Some(false) {
                out.push(Violation::new(
                    Rule::D004,
                    name.clone(),
                    pos,
                    format!("constraint `{}` does not hold for {name}", k.name),
                ));
            }
        }
    }
    normalize(&mut out);
    out
}

/// Objects whose attribute values match no initial state of their class's
/// automaton.
pub fn check_initial(
    snapshot: &SnapshotState,
    stss: &BTreeMap<String, StateTransitionSystem>,
) -> Vec<Violation> {
    let naming = Naming { snapshot: Some(snapshot) };
    let mut out = Vec::new();
    for (id, obj) in &snapshot.state.alive {
        let Some(sts) = stss.get(id.class()) else { continue };
        let fits = sts.initial().iter().any(|&s| {
            sts.tracked()
                .iter()
                .zip(&sts.states()[s].valuation)
                .all(|(a, v)| obj.valuation.get(a) == Some(v))
        });
        if !fits {
            let name = naming.name(id);
            out.push(Violation::new(
                Rule::D005,
                name.clone(),
                naming.pos(id),
                format!("no initial state of {} agrees with the attribute values of {name}", id.class()),
            ));
        }
    }
    normalize(&mut out);
    out
}
