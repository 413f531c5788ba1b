//! Receive-side queue with status coalescing.
//!
//! An arriving command or event is always appended. An arriving status
//! looks at the current tail only: if the tail is a status from the same
//! sender, the tail is obsolete and is overwritten in place; otherwise the
//! new status is appended. As a consequence no two adjacent queued messages
//! are ever status updates from the same sender.
//!
//! A plain FIFO mode and a whole-queue keyed mode (at most one status per
//! sender anywhere in the queue) are provided for comparison.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::message::{same_sender_status_pair, Message};

/// How an arriving message is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QueueMode {
    /// Always append.
    Fifo,
    /// Coalesce a status with a same-sender status at the tail.
    #[default]
    TailOnly,
    /// Coalesce a status with a same-sender status anywhere in the queue;
    /// the new status goes to the tail.
    Keyed,
}

impl fmt::Display for QueueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueueMode::Fifo => "fifo",
            QueueMode::TailOnly => "tail",
            QueueMode::Keyed => "keyed",
        })
    }
}

impl FromStr for QueueMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(QueueMode::Fifo),
            "tail" | "tail-only" | "tailonly" | "uqa" => Ok(QueueMode::TailOnly),
            "keyed" => Ok(QueueMode::Keyed),
            other => Err(format!(
                "unknown queue variant `{other}` (expected fifo, tail or keyed)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Inserted,
    /// The previous tail was an obsolete status and was overwritten.
    ReplacedTail,
    /// Keyed mode only: an obsolete status further up the queue was removed
    /// and the new status appended.
    ReplacedKeyed,
}

impl EnqueueOutcome {
    pub fn replaced(self) -> bool {
        !matches!(self, EnqueueOutcome::Inserted)
    }
}

/// FIFO queue of messages with coalescing insertion. Head is the oldest.
#[derive(Debug, Clone, Default)]
pub struct UpdatableQueue {
    items: VecDeque<Message>,
    inserted: u64,
    replaced: u64,
    dequeued: u64,
}

impl UpdatableQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn replaced(&self) -> u64 {
        self.replaced
    }

    pub fn dequeued(&self) -> u64 {
        self.dequeued
    }

    pub fn iter(&self) -> impl Iterator<Item = &Message> {
        self.items.iter()
    }

    pub fn head(&self) -> Option<&Message> {
        self.items.front()
    }

    pub fn tail(&self) -> Option<&Message> {
        self.items.back()
    }

    pub fn enqueue(&mut self, mode: QueueMode, msg: Message, now: f64) -> EnqueueOutcome {
        match mode {
            QueueMode::Fifo => self.enqueue_fifo(msg, now),
            QueueMode::TailOnly => self.enqueue_uqa(msg, now),
            QueueMode::Keyed => self.enqueue_keyed(msg, now),
        }
    }

    /// Tail-only coalescing insert.
    pub fn enqueue_uqa(&mut self, mut msg: Message, now: f64) -> EnqueueOutcome {
        stamp(&mut msg, now);
        self.inserted += 1;
        if let Some(tail) = self.items.back_mut() {
            if same_sender_status_pair(tail, &msg) {
                *tail = msg;
                self.replaced += 1;
                return EnqueueOutcome::ReplacedTail;
            }
        }
        self.items.push_back(msg);
        EnqueueOutcome::Inserted
    }

    pub fn enqueue_fifo(&mut self, mut msg: Message, now: f64) -> EnqueueOutcome {
        stamp(&mut msg, now);
        self.inserted += 1;
        self.items.push_back(msg);
        EnqueueOutcome::Inserted
    }

    /// Whole-queue keyed insert: removes any queued status from the same
    /// sender, then appends.
    pub fn enqueue_keyed(&mut self, mut msg: Message, now: f64) -> EnqueueOutcome {
        stamp(&mut msg, now);
        self.inserted += 1;
        if msg.is_status() {
            // Keyed inserts keep at most one status per sender, so the first
            // match is the only one.
            if let Some(pos) = self
                .items
                .iter()
                .position(|m| same_sender_status_pair(m, &msg))
            {
                let was_tail = pos + 1 == self.items.len();
                self.items.remove(pos);
                self.items.push_back(msg);
                self.replaced += 1;
                return if was_tail {
                    EnqueueOutcome::ReplacedTail
                } else {
                    EnqueueOutcome::ReplacedKeyed
                };
            }
        }
        self.items.push_back(msg);
        EnqueueOutcome::Inserted
    }

    /// Removes the head and stamps its dequeue time.
    pub fn dequeue(&mut self, now: f64) -> Option<Message> {
        let mut msg = self.items.pop_front()?;
        msg.t_dequeued = Some(now);
        self.dequeued += 1;
        Some(msg)
    }

    /// `inserted == replaced + len + dequeued`.
    pub fn is_conserved(&self) -> bool {
        self.inserted == self.replaced + self.items.len() as u64 + self.dequeued
    }

    /// True when no two adjacent entries are same-sender statuses.
    pub fn adjacency_holds(&self) -> bool {
        self.items
            .iter()
            .zip(self.items.iter().skip(1))
            .all(|(a, b)| !same_sender_status_pair(a, b))
    }
}

fn stamp(msg: &mut Message, now: f64) {
    debug_assert!(msg.t_enqueued.is_none(), "message enqueued twice");
    debug_assert!(now >= msg.t_created, "enqueue before creation");
    msg.t_enqueued = Some(now);
}
