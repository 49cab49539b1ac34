//! Compilation of ASTs into semantic objects: class models into static
//! models, state diagrams into flat diagrams and state transition systems.

mod blackbox;
mod error;
mod flatten;
mod static_model;
mod sts_build;
mod terms;

pub use blackbox::{derive_blackbox, derive_blackbox_with, tick_inputs};
pub use error::ElabError;
pub use flatten::{flatten, FlatStateDiagram, FlatTransition};
pub use static_model::{
    elaborate_static, snapshot_state, ClassInfo, Constraint, LinkEnd, SnapshotState, StaticModel,
};
pub(crate) use terms::literal_value;
pub use sts_build::{build_sts, build_sts_with, passive_sts, BuildOptions, DEFAULT_BUDGET};

use crate::dsl::StateDiagramAst;
use crate::model::StateTransitionSystem;

/// Flattens and builds in one go, for the class owning the diagram or
/// `class` when given.
pub fn compile_diagram(
    diagram: &StateDiagramAst,
    model: &StaticModel,
    class: &str,
    opts: &BuildOptions,
) -> Result<StateTransitionSystem, ElabError> {
    let flat = flatten(diagram)?;
    build_sts_with(&flat, model, class, opts)
}


/// One automaton per concrete class: compiled from the class's diagram,
/// passive for classes without one. Each diagram must name its owner.
pub fn automata(
    model: &StaticModel,
    diagrams: &[StateDiagramAst],
    opts: &BuildOptions,
) -> Result<std::collections::BTreeMap<String, StateTransitionSystem>, ElabError> {
    let mut out = std::collections::BTreeMap::new();
    for d in diagrams {
        let owner = d.owner.clone().unwrap_or_default();
        if !model.classes.contains_key(&owner) {
            return Err(ElabError::UnknownClass {
                class: owner,
                pos: d.states.first().map(|s| s.pos).unwrap_or_default(),
            });
        }
        out.insert(owner.clone(), compile_diagram(d, model, &owner, opts)?);
    }
    for c in model.classes.values().filter(|c| !c.is_abstract) {
        if !out.contains_key(&c.name) {
            out.insert(c.name.clone(), passive_sts(model, &c.name)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
