use crate::elaborate::ElabError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("class {0} has no state transition system")]
    NoSts(String),
    #[error("no initial state of {class} agrees with the attribute values of {object}")]
    InitialStateEmpty { class: String, object: String },
    #[error("object {object} instantiates abstract class {class}")]
    AbstractInstantiation { class: String, object: String },
    #[error(transparent)]
    Elab(#[from] ElabError),
}
