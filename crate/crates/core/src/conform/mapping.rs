//! Abstract transitions to sets of concrete automaton transitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dsl::{ArgPattern, Pos};
use crate::elaborate::StaticModel;
use crate::model::{ParamPattern, SendTargetSpec, StateTransitionSystem, Term, TransitionKind, Trigger, Value};

use super::automata::{AbstractAutomaton, AbstractTransition, Direction};
use super::ConformError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub role: String,
    pub interaction: usize,
    pub message: String,
    pub pos: Pos,
}

/// Concrete transitions for step `step` of `role`'s chain, as indices into
/// the automaton of the role's class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappedTransition {
    pub role: String,
    pub step: usize,
    pub interaction: usize,
    pub direction: Direction,
    pub selector: String,
    pub concrete: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransitionMap {
    pub entries: Vec<MappedTransition>,
    pub defects: Vec<Defect>,
}

impl TransitionMap {
    pub fn get(&self, role: &str, step: usize) -> Option<&BTreeSet<usize>> {
        self.entries
            .iter()
            .find(|e| e.role == role && e.step == step)
            .map(|e| &e.concrete)
    }
}

fn lit(p: &ArgPattern) -> Option<Value> {
    match p {
        ArgPattern::Lit(l) => crate::elaborate::literal_value(l),
        ArgPattern::Wild => None,
    }
}

/// Whether some argument list fits both the concrete and the abstract side.
fn args_compatible(concrete: &[Option<Value>], abstract_: &[ArgPattern]) -> bool {
    if concrete.is_empty() || abstract_.is_empty() {
        return true;
    }
    concrete.len() == abstract_.len()
        && concrete.iter().zip(abstract_).all(|(c, a)| match (c, lit(a)) {
            (Some(c), Some(a)) => *c == a,
            _ => true,
        })
}

fn matches(
    t: &crate::model::Transition,
    at: &AbstractTransition,
    peer_class: &str,
    own_class: &str,
    model: &StaticModel,
) -> bool {
    if t.kind != TransitionKind::Explicit {
        return false;
    }
    match at.direction {
        Direction::In => match &t.trigger {
            Trigger::Event(ev) if ev.selector == at.selector => {
                let c: Vec<Option<Value>> = ev
                    .params
                    .iter()
                    .map(|p| match p {
                        ParamPattern::Lit(v) => Some(v.clone()),
                        _ => None,
                    })
                    .collect();
                args_compatible(&c, &at.args)
            }
            _ => false,
        },
        Direction::Out => t.outputs.iter().any(|o| {
            let related = |c: &str| model.is_subclass(c, peer_class) || model.is_subclass(peer_class, c);
            let target_ok = match &o.target {
                SendTargetSpec::Link(key) => model
                    .link_ends
                    .get(own_class)
                    .and_then(|ends| ends.get(key))
                    .is_some_and(|e| related(&e.target_class)),
                SendTargetSpec::New(c) => related(c),
                SendTargetSpec::Binder(_) | SendTargetSpec::Sender => true,
            };
            let c: Vec<Option<Value>> = o
                .args
                .iter()
                .map(|a| match a {
                    Term::Lit(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            o.selector == at.selector && target_ok && (o.args.len() == at.args.len() || at.args.is_empty()) && args_compatible(&c, &at.args)
        }),
    }
}

/// For every abstract transition, the explicit transitions of the role
/// class's automaton that can realize it. Empty sets are reported as defects.
pub fn map_abstract_transitions(
    autos: &BTreeMap<String, AbstractAutomaton>,
    stss: &BTreeMap<String, StateTransitionSystem>,
    model: &StaticModel,
) -> Result<TransitionMap, ConformError> {
    let mut out = TransitionMap::default();
    for (role, a) in autos {
        let sts = stss.get(&a.class).ok_or_else(|| ConformError::UnknownRoleClass {
            role: role.clone(),
            class: a.class.clone(),
        })?;
        for (j, at) in a.transitions.iter().enumerate() {
            let peer_class = autos.get(&at.peer).map_or("", |p| p.class.as_str());
            let set: BTreeSet<usize> = sts
                .transitions()
                .iter()
                .enumerate()
                .filter(|(_, t)| matches(t, at, peer_class, &a.class, model))
                .map(|(k, _)| k)
                .collect();
            if set.is_empty() {
                out.defects.push(Defect {
                    role: role.clone(),
                    interaction: at.interaction,
                    message: format!(
                        "no concrete transition of {} {} `{}`",
                        a.class,
                        match at.direction {
                            Direction::In => "accepts",
                            Direction::Out => "sends",
                        },
                        at.selector
                    ),
                    pos: at.pos,
                });
            }
            out.entries.push(MappedTransition {
                role: role.clone(),
                step: j,
                interaction: at.interaction,
                direction: at.direction,
                selector: at.selector.clone(),
                concrete: set,
            });
        }
    }
    Ok(out)
}
