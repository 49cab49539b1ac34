//! Sequence diagrams as exemplary interaction sequences: abstract state
//! automata per lifeline and an existential conformance check.

mod automata;
mod exemplary;
mod mapping;

pub use automata::{derive_automata, AbstractAutomaton, AbstractTransition, Direction};
pub use exemplary::{
    check_exemplary, project, realizes, ConformOptions, ConformanceReport, OrderMode, Projected, Verdict, WorldTemplate,
};
pub use mapping::{map_abstract_transitions, Defect, MappedTransition, TransitionMap};

use crate::simulate::SimError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConformError {
    #[error("lifeline `{role}` has class {class}, which has no automaton")]
    UnknownRoleClass { role: String, class: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}
