//! Per-lifeline abstract state automata of a sequence diagram.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dsl::{ArgPattern, Pos, SequenceDiagramAst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Transition `i` of a chain leads from abstract state `i` to `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractTransition {
    /// Index of the interaction in the diagram.
    pub interaction: usize,
    pub direction: Direction,
    pub peer: String,
    pub selector: String,
    pub args: Vec<ArgPattern>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractAutomaton {
    pub role: String,
    pub class: String,
    pub transitions: Vec<AbstractTransition>,
}

impl AbstractAutomaton {
    /// One state before, between and after the interactions.
    pub fn state_count(&self) -> usize {
        self.transitions.len() + 1
    }
}

/// Chains per role: an interaction `a -> b` is an output on `a`'s chain and
/// an input on `b`'s; a self-message contributes both, output first.
pub fn derive_automata(seq: &SequenceDiagramAst) -> BTreeMap<String, AbstractAutomaton> {
    let mut out: BTreeMap<String, AbstractAutomaton> = seq
        .lifelines
        .iter()
        .map(|l| {
            (
                l.role.clone(),
                AbstractAutomaton {
                    role: l.role.clone(),
                    class: l.class.clone(),
                    transitions: Vec::new(),
                },
            )
        })
        .collect();
    for (i, m) in seq.interactions.iter().enumerate() {
        let t = |direction, peer: &str| AbstractTransition {
            interaction: i,
            direction,
            peer: peer.to_string(),
            selector: m.selector.clone(),
            args: m.args.clone(),
            pos: m.pos,
        };
        if let Some(a) = out.get_mut(&m.from) {
            a.transitions.push(t(Direction::Out, &m.to));
        }
        if let Some(b) = out.get_mut(&m.to) {
            b.transitions.push(t(Direction::In, &m.from));
        }
    }
    out
}
