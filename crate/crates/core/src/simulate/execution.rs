//! Recorded executions and their line-delimited JSON trace.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::model::{Label, Message, ObjectId, SystemState, TimedStream, TransitionKind, Value};

/// Version of the trace format written by [`Execution::trace`].
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Send,
    Deliver,
    Create,
    Fire,
}

/// One observable event. For `fire`, `from` and `to` are the acting object
/// and `selector` is the consumed message's, if any.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TraceEvent {
    pub tick: usize,
    pub kind: EventKind,
    pub from: ObjectId,
    pub to: ObjectId,
    pub selector: Option<String>,
    pub args: Vec<Value>,
    /// Global send number of the message, for send/deliver/create.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fire: Option<FireInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FireInfo {
    pub source: Label,
    pub target: Label,
    /// Index of the transition in the object's automaton.
    pub transition: usize,
    pub transition_kind: TransitionKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ObjectHistory {
    pub class: String,
    pub input: TimedStream,
    pub output: TimedStream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// The horizon was reached.
    Horizon,
    /// Empty medium and no enabled spontaneous transition.
    Quiescent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Execution {
    pub horizon: usize,
    /// Ticks actually simulated.
    pub ticks: usize,
    pub histories: BTreeMap<ObjectId, ObjectHistory>,
    pub events: Vec<TraceEvent>,
    /// System state before the first tick and after each tick, when recorded.
    pub trajectory: Vec<SystemState>,
    pub initial: SystemState,
    pub final_state: SystemState,
    pub in_flight: Vec<Message>,
    pub termination: Termination,
}

impl Execution {
    pub fn sends(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Send)
    }

    pub fn deliveries(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Deliver)
    }

    /// Line-delimited JSON: a snapshot record, then per tick a tick record
    /// followed by that tick's events.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        let objects: Vec<_> = self
            .initial
            .alive
            .iter()
            .map(|(id, s)| {
                json!({
                    "id": id,
                    "class": id.class(),
                    "control": s.control,
                    "attrs": s.valuation,
                    "links": s.links,
                })
            })
            .collect();
        let head = json!({"version": TRACE_VERSION, "tick": 0, "kind": "snapshot", "objects": objects});
        out.push_str(&head.to_string());
        out.push('\n');
        let mut events = self.events.iter().peekable();
        for t in 0..self.ticks {
            out.push_str(&json!({"tick": t, "kind": "tick"}).to_string());
            out.push('\n');
            while let Some(e) = events.next_if(|e| e.tick == t) {
                out.push_str(&serde_json::to_string(e).expect("trace event serializes"));
                out.push('\n');
            }
        }
        out
    }
}
