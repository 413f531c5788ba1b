use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

/// Handle returned by [`SimClock::schedule`], used for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Pending<E> {
    at: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Pending<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Pending<E> {}

impl<E> PartialOrd for Pending<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest (time, seq).
impl<E> Ord for Pending<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Simulation time plus the pending event set. Events at equal times fire in
/// the order they were scheduled.
pub struct SimClock<E> {
    now: f64,
    next_seq: u64,
    heap: BinaryHeap<Pending<E>>,
    live: HashSet<u64>,
}

impl<E> Default for SimClock<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> SimClock<E> {
    pub fn new() -> Self {
        SimClock {
            now: 0.0,
            next_seq: 0,
            heap: BinaryHeap::new(),
            live: HashSet::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Panics if `at` is earlier than the current time or not finite.
    pub fn schedule(&mut self, at: f64, event: E) -> EventHandle {
        assert!(
            at.is_finite() && at >= self.now,
            "cannot schedule at {at} (now {})",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Pending { at, seq, event });
        self.live.insert(seq);
        EventHandle(seq)
    }

    pub fn schedule_in(&mut self, delay: f64, event: E) -> EventHandle {
        self.schedule(self.now + delay, event)
    }

    /// Cancels a pending event. Cancelling a fired or unknown handle is a
    /// no-op.
    pub fn cancel(&mut self, handle: EventHandle) {
        self.live.remove(&handle.0);
    }

    pub fn pending(&self) -> usize {
        self.live.len()
    }

    /// Pops the next live event with time `<= until`, advancing the clock to
    /// its time.
    pub fn pop_until(&mut self, until: f64) -> Option<(f64, E)> {
        loop {
            let top = self.heap.peek()?;
            if top.at > until {
                return None;
            }
            let p = self.heap.pop().expect("peeked");
            if !self.live.remove(&p.seq) {
                continue;
            }
            self.now = p.at;
            return Some((p.at, p.event));
        }
    }

    /// Moves the clock forward without firing anything.
    pub fn advance_to(&mut self, until: f64) {
        assert!(until >= self.now, "clock cannot move backwards");
        self.now = until;
    }

    /// Fires every event with time `<= until` through `handler`, then leaves
    /// the clock at `until`.
    pub fn run<F>(&mut self, until: f64, mut handler: F)
    where
        F: FnMut(&mut Self, f64, E),
    {
        assert!(
            until >= self.now,
            "run target {until} is before now {}",
            self.now
        );
        while let Some((t, ev)) = self.pop_until(until) {
            handler(self, t, ev);
        }
        self.now = until;
    }
}
