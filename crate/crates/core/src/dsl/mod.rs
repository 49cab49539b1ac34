//! Textual front end: lexer, parsers and pretty-printers for class models
//! (`.uml`), state diagrams (`.stm`), sequence diagrams (`.seq`) and
//! snapshots (`.snap`).

pub mod ast;
mod error;
mod lexer;
mod parser;
pub mod print;

pub use ast::*;
pub use error::DslError;
pub use parser::{
    parse_class_model, parse_sequence_diagram, parse_snapshot, parse_state_diagram,
    resolve_snapshot, superclasses,
};

#[cfg(test)]
mod tests;
