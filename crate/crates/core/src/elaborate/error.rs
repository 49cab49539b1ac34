use crate::dsl::Pos;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElabError {
    #[error("{pos}: member `{name}` of class {class} conflicts with an inherited or sibling declaration")]
    SignatureConflict { name: String, class: String, pos: Pos },
    #[error("{pos}: generalization cycle through {}", .classes.join(", "))]
    CyclicInheritance { classes: Vec<String>, pos: Pos },
    #[error("{pos}: composition `{assoc}` allows {mult} aggregates per part; at most 1 permitted")]
    CompositionMultiplicity { assoc: String, mult: String, pos: Pos },
    #[error("{pos}: unknown class `{class}`")]
    UnknownClass { class: String, pos: Pos },
    #[error("composite state `{composite}` has no initial substate")]
    NoInitial { composite: String },
    #[error("{pos}: selector `{selector}` is not a method of {class}")]
    UnknownSelector { selector: String, class: String, pos: Pos },
    #[error("{pos}: {message}")]
    GuardTypeError { message: String, pos: Pos },
    #[error("{pos}: unknown name `{name}`")]
    UnknownName { name: String, pos: Pos },
    #[error("{pos}: abstract class {class} cannot be instantiated")]
    AbstractInstantiation { class: String, pos: Pos },
    #[error("enumeration needs more than the budget of {budget} steps")]
    BudgetExceeded { budget: usize },
    #[error("black-box behavior up to horizon {horizon} needs more than the budget of {budget} steps")]
    HorizonTooLarge { horizon: usize, budget: usize },
}

impl ElabError {
    pub fn pos(&self) -> Option<Pos> {
        use ElabError::*;
        match self {
            SignatureConflict { pos, .. }
            | CyclicInheritance { pos, .. }
            | CompositionMultiplicity { pos, .. }
            | UnknownClass { pos, .. }
            | UnknownSelector { pos, .. }
            | GuardTypeError { pos, .. }
            | UnknownName { pos, .. }
            | AbstractInstantiation { pos, .. } => Some(*pos),
            NoInitial { .. } | BudgetExceeded { .. } | HorizonTooLarge { .. } => None,
        }
    }

    pub(crate) fn from_model(e: ModelError, pos: Pos) -> Self {
        match e {
            ModelError::UnknownClass(class) => ElabError::UnknownClass { class, pos },
            ModelError::SignatureConflict { name, class } => ElabError::SignatureConflict { name, class, pos },
            ModelError::InvalidSts(message) => ElabError::GuardTypeError { message, pos },
        }
    }
}
