use std::fmt;

use serde::Serialize;

use super::ids::ObjectId;
use super::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Message {
    pub sender: ObjectId,
    pub receiver: ObjectId,
    pub selector: String,
    pub args: Vec<Value>,
    /// First message to a freshly allocated receiver.
    pub creation: bool,
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}: {}(", self.sender, self.receiver, self.selector)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A finite prefix of a timed stream: one message sequence per time unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct TimedStream {
    pub ticks: Vec<Vec<Message>>,
}

impl TimedStream {
    /// Appends `m` to tick `t`, padding with empty ticks as needed.
    pub fn push(&mut self, t: usize, m: Message) {
        if self.ticks.len() <= t {
            self.ticks.resize_with(t + 1, Vec::new);
        }
        self.ticks[t].push(m);
    }

    /// Pads with empty ticks up to `len` time units.
    pub fn extend_to(&mut self, len: usize) {
        if self.ticks.len() < len {
            self.ticks.resize_with(len, Vec::new);
        }
    }

    pub fn message_count(&self) -> usize {
        self.ticks.iter().map(Vec::len).sum()
    }

    /// All messages in time order, with their tick.
    pub fn messages(&self) -> impl Iterator<Item = (usize, &Message)> {
        self.ticks
            .iter()
            .enumerate()
            .flat_map(|(t, ms)| ms.iter().map(move |m| (t, m)))
    }
}
