#![allow(dead_code)]

use uqa_core::{Message, MessageKind, QueueMode, UpdatableQueue};

/// Straight transcription of the coalescing rule: pop the last element; if
/// the arrival is a status and the popped element is a status from the same
/// sender, drop the popped one, otherwise put it back; then append.
pub fn oracle_enqueue(list: &mut Vec<(u32, u64, MessageKind)>, m: (u32, u64, MessageKind)) {
    if m.2 == MessageKind::Status {
        if let Some(last) = list.pop() {
            let obsolete = last.2 == MessageKind::Status && last.0 == m.0;
            if !obsolete {
                list.push(last);
            }
        }
    }
    list.push(m);
}

pub fn key(m: &Message) -> (u32, u64, MessageKind) {
    (m.sender.0, m.seq, m.kind)
}

pub fn contents(q: &UpdatableQueue) -> Vec<(u32, u64, MessageKind)> {
    q.iter().map(key).collect()
}

pub fn msg(sender: u32, seq: u64, kind: MessageKind) -> Message {
    Message::new(seq, uqa_core::SenderId(sender), kind, 1, 0.0)
}

/// One step of a randomized workload.
#[derive(Debug, Clone, Copy)]
pub enum Op {
    Enqueue(u32, MessageKind),
    Dequeue,
}

/// Applies ops to a queue in `mode`, calling `check` after every step.
pub fn drive(
    mode: QueueMode,
    ops: &[Op],
    mut check: impl FnMut(&UpdatableQueue),
) -> UpdatableQueue {
    let mut q = UpdatableQueue::new();
    for (i, op) in ops.iter().enumerate() {
        let now = i as f64;
        match *op {
            Op::Enqueue(s, k) => {
                q.enqueue(mode, msg(s, i as u64, k), now);
            }
            Op::Dequeue => {
                q.dequeue(now);
            }
        }
        check(&q);
    }
    q
}

/// Deterministic op stream: `senders` senders, 70% status among enqueues,
/// `p_dequeue` share of dequeues.
pub fn random_ops(seed: u64, n: usize, senders: u32, p_dequeue: f64) -> Vec<Op> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < p_dequeue {
                Op::Dequeue
            } else {
                let s = rng.random_range(0..senders);
                let u: f64 = rng.random();
                let k = if u < 0.7 {
                    MessageKind::Status
                } else if u < 0.85 {
                    MessageKind::Command
                } else {
                    MessageKind::Event
                };
                Op::Enqueue(s, k)
            }
        })
        .collect()
}

/// Walks every trace of length `1..=max_len` over `alphabet` (a status or
/// command from a given sender), comparing the queue against the oracle
/// after every step. Returns the number of traces checked, or the first
/// mismatching trace.
pub fn exhaustive_check(
    alphabet: &[(u32, MessageKind)],
    max_len: usize,
) -> Result<u64, Vec<(u32, MessageKind)>> {
    fn walk(
        alphabet: &[(u32, MessageKind)],
        max_len: usize,
        q: &UpdatableQueue,
        oracle: &[(u32, u64, MessageKind)],
        trace: &mut Vec<(u32, MessageKind)>,
        count: &mut u64,
    ) -> Result<(), Vec<(u32, MessageKind)>> {
        if trace.len() == max_len {
            return Ok(());
        }
        for &(s, k) in alphabet {
            let seq = trace.len() as u64;
            let mut q2 = q.clone();
            q2.enqueue_uqa(msg(s, seq, k), 0.0);
            let mut o2 = oracle.to_vec();
            oracle_enqueue(&mut o2, (s, seq, k));
            trace.push((s, k));
            *count += 1;
            if contents(&q2) != o2 {
                return Err(trace.clone());
            }
            walk(alphabet, max_len, &q2, &o2, trace, count)?;
            trace.pop();
        }
        Ok(())
    }
    let mut count = 0;
    walk(
        alphabet,
        max_len,
        &UpdatableQueue::new(),
        &[],
        &mut Vec::new(),
        &mut count,
    )?;
    Ok(count)
}
