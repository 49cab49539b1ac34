//! Discrete-time execution of closed object systems over an asynchronous
//! medium with per-pair FIFO buffers.

mod enumerate;
mod error;
mod execution;
mod medium;
mod world;

pub use enumerate::{enumerate_executions, explore, Enumeration, Exploration};
pub use error::SimError;
pub use execution::{EventKind, Execution, FireInfo, ObjectHistory, Termination, TraceEvent, TRACE_VERSION};
pub use medium::{InFlight, Medium};
pub use world::{init_world, run, Policy, System, World};

#[cfg(test)]
mod tests;
