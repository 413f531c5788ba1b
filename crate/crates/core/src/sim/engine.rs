use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use super::{EventHandle, LinkParams, Receiver, SimClock, TcpModel, TransportKind};
use crate::message::{Message, TraceRecord};
use crate::metrics::{MetricsCollector, MetricsReport};
use crate::queue::{QueueMode, UpdatableQueue};
use crate::rng::{stream_rng, SimRng, LOSS_STREAM};

/// Everything the engine needs besides the traffic itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub transport: TransportKind,
    pub link: LinkParams,
    pub tcp: TcpModel,
    pub receiver_delay_s: f64,
    /// Receiver busy time charged per coalescing insert.
    pub uqa_overhead_s: f64,
    /// Coalescing flavor used by the UQA transports.
    pub queue_variant: QueueMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            transport: TransportKind::Udp,
            link: LinkParams::default(),
            tcp: TcpModel::default(),
            receiver_delay_s: 0.0,
            uqa_overhead_s: 0.001,
            queue_variant: QueueMode::TailOnly,
        }
    }
}

#[derive(Debug)]
enum Event {
    /// The application hands a message to the transport.
    Send {
        dest: usize,
        msg: Message,
    },
    DataArrive {
        dest: usize,
        msg: Message,
    },
    AckArrive {
        dest: usize,
        seq: u64,
    },
    Timeout {
        dest: usize,
        seq: u64,
    },
    Wake {
        dest: usize,
    },
}

/// Serializes packets onto one direction of a link.
#[derive(Debug, Default, Clone, Copy)]
struct Wire {
    busy_until: f64,
}

impl Wire {
    fn occupy(&mut self, now: f64, duration: f64) -> (f64, f64) {
        let start = self.busy_until.max(now);
        let end = start + duration;
        self.busy_until = end;
        (start, end)
    }
}

struct Flight {
    msg: Message,
    timer: EventHandle,
}

#[derive(Default)]
struct TcpSender {
    backlog: VecDeque<Message>,
    in_flight: BTreeMap<u64, Flight>,
}

#[derive(Default)]
struct TcpReceiver {
    next_expected: u64,
    out_of_order: BTreeMap<u64, Message>,
}

struct Destination {
    forward: Wire,
    reverse: Wire,
    loss_rng: SimRng,
    sender: TcpSender,
    tcp_rx: TcpReceiver,
    receiver: Receiver,
    metrics: MetricsCollector,
    /// Seqs in the order the transport handed them to the queue.
    handed_over: Vec<u64>,
    /// (created, enqueued) for every message handed to the queue.
    arrival_times: Vec<(f64, f64)>,
}

/// One source fanning traffic out to `n` receivers over independent links
/// with identical parameters.
pub struct Simulation {
    config: SimConfig,
    clock: SimClock<Event>,
    dests: Vec<Destination>,
    finished: bool,
}

impl Simulation {
    /// `schedules[d]` is the traffic for destination `d`; `seeds[d]` seeds
    /// that link's loss process. Sends are interleaved round-robin across
    /// destinations at equal times.
    pub fn new(config: SimConfig, schedules: &[Vec<TraceRecord>], seeds: &[u64]) -> Self {
        assert_eq!(schedules.len(), seeds.len(), "one seed per destination");
        let mode = config.transport.queue_mode(config.queue_variant);
        let dests = seeds
            .iter()
            .map(|&seed| Destination {
                forward: Wire::default(),
                reverse: Wire::default(),
                loss_rng: stream_rng(seed, LOSS_STREAM),
                sender: TcpSender::default(),
                tcp_rx: TcpReceiver {
                    next_expected: 1,
                    ..TcpReceiver::default()
                },
                receiver: Receiver::new(config.receiver_delay_s, mode, config.uqa_overhead_s),
                metrics: MetricsCollector::new(),
                handed_over: Vec::new(),
                arrival_times: Vec::new(),
            })
            .collect();
        let mut clock = SimClock::new();
        let longest = schedules.iter().map(Vec::len).max().unwrap_or(0);
        let mut merged: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..longest {
            for (d, s) in schedules.iter().enumerate() {
                if let Some(r) = s.get(i) {
                    merged.push((r.t_send, i, d));
                }
            }
        }
        merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (t, i, d) in merged {
            let mut msg = schedules[d][i].message.clone();
            msg.t_created = t;
            clock.schedule(t, Event::Send { dest: d, msg });
        }
        Simulation {
            config,
            clock,
            dests,
            finished: false,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    pub fn destinations(&self) -> usize {
        self.dests.len()
    }

    /// Fires every event up to and including `until`.
    pub fn run(&mut self, until: f64) {
        assert!(!self.finished || until >= self.clock.now());
        while let Some((t, ev)) = self.clock.pop_until(until) {
            self.handle(t, ev);
        }
        self.clock.advance_to(until);
        self.finished = true;
    }

    pub fn queue(&self, dest: usize) -> &UpdatableQueue {
        self.dests[dest].receiver.queue()
    }

    pub fn receiver(&self, dest: usize) -> &Receiver {
        &self.dests[dest].receiver
    }

    pub fn metrics(&self, dest: usize) -> &MetricsCollector {
        &self.dests[dest].metrics
    }

    /// Seqs in the order the transport delivered them to the queue.
    pub fn handed_over(&self, dest: usize) -> &[u64] {
        &self.dests[dest].handed_over
    }

    /// `(t_created, t_enqueued)` per delivered-to-queue message.
    pub fn arrival_times(&self, dest: usize) -> &[(f64, f64)] {
        &self.dests[dest].arrival_times
    }

    /// Finalized report per destination, measured over `[0, run_duration_s]`.
    pub fn reports(&self, run_duration_s: f64) -> Vec<MetricsReport> {
        self.dests
            .iter()
            .map(|d| {
                let mut m = d.metrics.clone();
                m.final_queue_len = d.receiver.queue().len() as u64;
                m.messages_in_transit =
                    m.messages_sent - m.messages_lost - d.handed_over.len() as u64;
                m.finalize(run_duration_s)
            })
            .collect()
    }

    fn handle(&mut self, now: f64, ev: Event) {
        match ev {
            Event::Send { dest, msg } => self.on_send(now, dest, msg),
            Event::DataArrive { dest, msg } => self.on_data(now, dest, msg),
            Event::AckArrive { dest, seq } => self.on_ack(now, dest, seq),
            Event::Timeout { dest, seq } => self.on_timeout(now, dest, seq),
            Event::Wake { dest } => {
                let d = &mut self.dests[dest];
                if let Some(at) = d.receiver.wake(now, &mut d.metrics) {
                    self.clock.schedule(at, Event::Wake { dest });
                }
            }
        }
    }

    fn on_send(&mut self, now: f64, dest: usize, msg: Message) {
        self.dests[dest].metrics.messages_sent += 1;
        if self.config.transport.is_reliable() {
            self.dests[dest].sender.backlog.push_back(msg);
            self.release_window(now, dest);
        } else {
            let (_, lost) = self.put_on_wire(now, dest, &msg, true);
            if lost {
                self.dests[dest].metrics.messages_lost += 1;
            }
        }
    }

    /// Serializes a data packet, draws loss, and schedules its arrival.
    /// Returns the transmission start and whether the packet was lost.
    fn put_on_wire(&mut self, now: f64, dest: usize, msg: &Message, first: bool) -> (f64, bool) {
        let link = self.config.link;
        let d = &mut self.dests[dest];
        let (start, end) = d.forward.occupy(now, link.serialization_s(msg.size_bytes));
        d.metrics
            .record_transmission(start, end, msg.size_bits(), first);
        let lost = link.loss_prob > 0.0 && d.loss_rng.random::<f64>() < link.loss_prob;
        if !lost {
            self.clock.schedule(
                end + link.propagation_delay_s,
                Event::DataArrive {
                    dest,
                    msg: msg.clone(),
                },
            );
        }
        (start, lost)
    }

    fn release_window(&mut self, now: f64, dest: usize) {
        let window = self.config.tcp.window_size as usize;
        loop {
            let d = &mut self.dests[dest];
            if d.sender.in_flight.len() >= window {
                break;
            }
            let Some(msg) = d.sender.backlog.pop_front() else {
                break;
            };
            self.transmit_reliable(now, dest, msg, true);
        }
    }

    fn transmit_reliable(&mut self, now: f64, dest: usize, msg: Message, first: bool) {
        let (start, _) = self.put_on_wire(now, dest, &msg, first);
        let seq = msg.seq;
        let timer = self
            .clock
            .schedule(start + self.config.tcp.rto_s, Event::Timeout { dest, seq });
        self.dests[dest]
            .sender
            .in_flight
            .insert(seq, Flight { msg, timer });
    }

    fn on_timeout(&mut self, now: f64, dest: usize, seq: u64) {
        if let Some(flight) = self.dests[dest].sender.in_flight.remove(&seq) {
            self.transmit_reliable(now, dest, flight.msg, false);
        }
    }

    fn on_ack(&mut self, now: f64, dest: usize, seq: u64) {
        if let Some(flight) = self.dests[dest].sender.in_flight.remove(&seq) {
            self.clock.cancel(flight.timer);
            self.release_window(now, dest);
        }
    }

    fn on_data(&mut self, now: f64, dest: usize, msg: Message) {
        if !self.config.transport.is_reliable() {
            let rx_start = now - self.config.link.serialization_s(msg.size_bytes);
            let d = &mut self.dests[dest];
            d.metrics.record_arrival(rx_start, now, msg.size_bits());
            self.hand_to_queue(now, dest, msg);
            return;
        }
        let rx_start = now - self.config.link.serialization_s(msg.size_bytes);
        let d = &mut self.dests[dest];
        let seq = msg.seq;
        let duplicate = seq < d.tcp_rx.next_expected || d.tcp_rx.out_of_order.contains_key(&seq);
        if !duplicate {
            d.metrics.record_arrival(rx_start, now, msg.size_bits());
        }
        // The ack leaves once the receiver has processed the insert.
        let ack_ready = now + d.receiver.enqueue_cost();
        let ack_bytes = self.config.tcp.ack_size_bytes;
        let (_, ack_end) = d
            .reverse
            .occupy(ack_ready, self.config.link.serialization_s(ack_bytes));
        d.metrics.record_ack(ack_end, u64::from(ack_bytes) * 8);
        self.clock.schedule(
            ack_end + self.config.link.propagation_delay_s,
            Event::AckArrive { dest, seq },
        );
        if duplicate {
            return;
        }
        d.tcp_rx.out_of_order.insert(seq, msg);
        loop {
            let d = &mut self.dests[dest];
            let next = d.tcp_rx.next_expected;
            let Some(ready) = d.tcp_rx.out_of_order.remove(&next) else {
                break;
            };
            d.tcp_rx.next_expected += 1;
            self.hand_to_queue(now, dest, ready);
        }
    }

    fn hand_to_queue(&mut self, now: f64, dest: usize, msg: Message) {
        let d = &mut self.dests[dest];
        d.handed_over.push(msg.seq);
        d.arrival_times.push((msg.t_created, now));
        if let Some(at) = d.receiver.arrive(now, msg, &mut d.metrics) {
            self.clock.schedule(at, Event::Wake { dest });
        }
    }
}

/// Feeds a trace straight into one receiver (no network) and runs until
/// `until`. Returns the receiver and its report.
pub fn replay(
    records: &[TraceRecord],
    mode: QueueMode,
    receiver_delay_s: f64,
    uqa_overhead_s: f64,
    until: f64,
) -> (Receiver, MetricsReport) {
    enum Ev {
        Arrive(Message),
        Wake,
    }
    let mut clock = SimClock::new();
    let mut sorted: Vec<&TraceRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.t_send.total_cmp(&b.t_send));
    for r in sorted {
        let mut m = r.message.clone();
        m.t_created = r.t_send;
        clock.schedule(r.t_send, Ev::Arrive(m));
    }
    let mut rx = Receiver::new(receiver_delay_s, mode, uqa_overhead_s);
    let mut metrics = MetricsCollector::new();
    clock.run(until, |c, t, ev| {
        let wake = match ev {
            Ev::Arrive(m) => {
                metrics.messages_sent += 1;
                metrics.record_arrival(t, t, m.size_bits());
                rx.arrive(t, m, &mut metrics)
            }
            Ev::Wake => rx.wake(t, &mut metrics),
        };
        if let Some(at) = wake {
            c.schedule(at, Ev::Wake);
        }
    });
    metrics.final_queue_len = rx.queue().len() as u64;
    let report = metrics.finalize(until);
    (rx, report)
}
