//! The communication medium: one FIFO buffer per ordered pair of objects.

use std::collections::{BTreeMap, VecDeque};

use crate::model::{Message, ObjectId};

/// A message in transit, stamped with its send tick and global send number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InFlight {
    pub message: Message,
    pub sent: usize,
    pub seq: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Medium {
    buffers: BTreeMap<(ObjectId, ObjectId), VecDeque<InFlight>>,
}

impl Medium {
    pub fn enqueue(&mut self, m: InFlight) {
        let key = (m.message.sender.clone(), m.message.receiver.clone());
        self.buffers.entry(key).or_default().push_back(m);
    }

    /// Senders whose oldest message to `receiver` was sent before `tick`.
    pub fn deliverable(&self, receiver: &ObjectId, tick: usize) -> Vec<ObjectId> {
        self.buffers
            .iter()
            .filter(|((_, r), q)| r == receiver && q.front().is_some_and(|m| m.sent < tick))
            .map(|((s, _), _)| s.clone())
            .collect()
    }

    pub fn dequeue(&mut self, sender: &ObjectId, receiver: &ObjectId) -> Option<InFlight> {
        let key = (sender.clone(), receiver.clone());
        let q = self.buffers.get_mut(&key)?;
        let m = q.pop_front();
        if q.is_empty() {
            self.buffers.remove(&key);
        }
        m
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.buffers.values().map(VecDeque::len).sum()
    }

    /// Buffered messages, per pair in FIFO order.
    pub fn in_flight(&self) -> impl Iterator<Item = &InFlight> {
        self.buffers.values().flatten()
    }
}
