//! System-model vocabulary: identifiers, values, signatures, messages,
//! timed streams, object and system states, state transition systems and
//! black-box behaviors.

mod behavior;
mod ids;
mod inheritance;
mod message;
mod signature;
mod state;
mod sts;
mod term;
mod value;

pub use behavior::{Behavior, InputStream, OutputStream};
pub use ids::{creatables, Cardinality, IdSetSpec, ObjectId};
pub use inheritance::{ClassHierarchy, InheritanceRelation};
pub use message::{Message, TimedStream};
pub use signature::{AttrType, MethodSig, Signature, SignatureConflict, ValueType};
pub use state::{Label, ObjectState, SystemState};
pub use sts::{
    EventSpec, InputSymbol, OutArg, OutEvent, ParamPattern, SendTargetSpec, SendTemplate, StateId,
    StateTransitionSystem, StsParts, StsState, Transition, TransitionKind, Trigger,
};
pub use term::{Bindings, Env, Opaque, Term};
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("member `{name}` of class {class} conflicts with another declaration")]
    SignatureConflict { name: String, class: String },
    #[error("malformed state transition system: {0}")]
    InvalidSts(String),
}
