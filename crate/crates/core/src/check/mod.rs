//! Consistency rules, bounded refinement and joint checking of documents.

mod catalog;
mod documents;
mod refinement;
mod state;
mod statics;
mod violation;

pub use catalog::{Rule, Severity};
pub use documents::{check_documents, CheckOptions, Documents, JointVerdict, RefinementResult, Report};
pub use refinement::{check_refinement, refinement_inputs, replay, Counterexample, RefinementStatus, RefinementVerdict};
pub use state::{check_initial, check_state, Naming};
pub use statics::{check_diagram, check_instances, check_model, check_static};
pub use violation::{normalize, Violation};
