//! Per-run measurement: throughput on both ends, time-weighted queue length,
//! peak queue size and time in queue.
//!
//! Throughput is measured the way packet-level simulators report it for
//! constant-bit-rate applications: bits moved divided by the span between
//! the first and last packet on that side. The client is the sending node
//! (data bits it put on the wire); the server is the receiving node (data
//! bits it received plus acknowledgement bits it had to send). A side with
//! no recorded span falls back to the full run duration.

/// Guard used when dividing by a queue length.
pub const LITTLE_EPSILON: f64 = 1e-9;

/// A closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

impl Span {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    fn extend(span: &mut Option<Span>, start: f64, end: f64) {
        match span {
            Some(s) => {
                s.start = s.start.min(start);
                s.end = s.end.max(end);
            }
            None => *span = Some(Span { start, end }),
        }
    }
}

/// Event-driven time-weighted queue length.
#[derive(Debug, Clone, Default)]
pub struct QueueSampler {
    last_t: f64,
    last_len: usize,
    integral: f64,
    peak: usize,
}

impl QueueSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that the queue has held `len` messages since `t`.
    ///
    /// Panics if `t` goes backwards.
    pub fn record(&mut self, t: f64, len: usize) {
        assert!(
            t >= self.last_t,
            "queue sample at {t} precedes {}",
            self.last_t
        );
        self.integral += self.last_len as f64 * (t - self.last_t);
        self.last_t = t;
        self.last_len = len;
        self.peak = self.peak.max(len);
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    /// ∫len dt over `[0, end]`.
    pub fn integral_to(&self, end: f64) -> f64 {
        self.integral + self.last_len as f64 * (end - self.last_t).max(0.0)
    }

    /// Time-average over `[0, end]`; zero for an empty interval.
    pub fn average(&self, end: f64) -> f64 {
        if end > 0.0 {
            self.integral_to(end) / end
        } else {
            0.0
        }
    }
}

/// Raw observations for one sender/receiver pair.
#[derive(Debug, Clone, Default)]
pub struct MetricsCollector {
    pub queue: QueueSampler,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub messages_replaced: u64,
    pub messages_lost: u64,
    pub retransmissions: u64,
    pub acks_generated: u64,
    pub data_bits_sent: u64,
    pub data_bits_received: u64,
    pub ack_bits_sent: u64,
    pub final_queue_len: u64,
    /// Sent but not yet handed to the receiver's queue when the run ended.
    pub messages_in_transit: u64,
    pub client_span: Option<Span>,
    pub server_span: Option<Span>,
    time_in_queue_sum: f64,
}

impl MetricsCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_queue_sample(&mut self, t: f64, len: usize) {
        self.queue.record(t, len);
    }

    /// A data packet occupied the sender's link during `[start, end]`.
    /// Only first transmissions add to the bit count.
    pub fn record_transmission(&mut self, start: f64, end: f64, bits: u64, first: bool) {
        if first {
            self.data_bits_sent += bits;
        } else {
            self.retransmissions += 1;
        }
        Span::extend(&mut self.client_span, start, end);
    }

    /// A data packet was received over `[start, end]`.
    pub fn record_arrival(&mut self, start: f64, end: f64, bits: u64) {
        self.data_bits_received += bits;
        Span::extend(&mut self.server_span, start, end);
    }

    /// The receiver put an acknowledgement on the reverse link, finishing at
    /// `end`.
    pub fn record_ack(&mut self, end: f64, bits: u64) {
        self.acks_generated += 1;
        self.ack_bits_sent += bits;
        if let Some(s) = self.server_span.as_mut() {
            s.end = s.end.max(end);
        }
    }

    pub fn record_delivery(&mut self, time_in_queue: f64) {
        self.messages_delivered += 1;
        self.time_in_queue_sum += time_in_queue;
    }

    pub fn finalize(&self, run_duration_s: f64) -> MetricsReport {
        let rate = |bits: u64, span: Option<Span>| -> f64 {
            let secs = match span {
                Some(s) if s.duration() > 0.0 => s.duration(),
                _ => run_duration_s,
            };
            if secs > 0.0 {
                bits as f64 / secs
            } else {
                0.0
            }
        };
        let avg_time_in_queue_s = if self.messages_delivered > 0 {
            self.time_in_queue_sum / self.messages_delivered as f64
        } else {
            0.0
        };
        let mut report = MetricsReport {
            avg_client_throughput_bps: rate(self.data_bits_sent, self.client_span),
            avg_server_throughput_bps: rate(
                self.data_bits_received + self.ack_bits_sent,
                self.server_span,
            ),
            avg_queue_len: self.queue.average(run_duration_s),
            peak_queue_len: self.queue.peak() as f64,
            avg_time_in_queue_s,
            messages_sent: self.messages_sent,
            messages_delivered: self.messages_delivered,
            messages_replaced: self.messages_replaced,
            messages_lost: self.messages_lost,
            final_queue_len: self.final_queue_len,
            messages_in_transit: self.messages_in_transit,
            acks_generated: self.acks_generated,
            retransmissions: self.retransmissions,
            run_duration_s,
            littles_residual: 0.0,
        };
        report.littles_residual = report.littles_residual();
        report
    }
}

/// Finalized statistics for one run (or the mean over several destinations).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub avg_client_throughput_bps: f64,
    pub avg_server_throughput_bps: f64,
    pub avg_queue_len: f64,
    /// Largest instantaneous length; a mean of peaks for combined reports.
    pub peak_queue_len: f64,
    pub avg_time_in_queue_s: f64,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub messages_replaced: u64,
    pub messages_lost: u64,
    pub final_queue_len: u64,
    pub messages_in_transit: u64,
    pub acks_generated: u64,
    pub retransmissions: u64,
    pub run_duration_s: f64,
    pub littles_residual: f64,
}

impl MetricsReport {
    /// `sent == delivered + replaced + lost + final queue length`, counting
    /// anything still on the wire at the end as in transit.
    pub fn is_conserved(&self) -> bool {
        self.messages_sent
            == self.messages_delivered
                + self.messages_replaced
                + self.messages_lost
                + self.final_queue_len
                + self.messages_in_transit
    }

    pub fn effective_arrival_rate(&self) -> f64 {
        if self.run_duration_s > 0.0 {
            self.messages_delivered as f64 / self.run_duration_s
        } else {
            0.0
        }
    }

    pub fn littles_residual(&self) -> f64 {
        littles_law_residual(self, self.effective_arrival_rate())
    }

    /// Sums counters and averages everything else over per-destination
    /// reports.
    pub fn combine(reports: &[MetricsReport]) -> MetricsReport {
        assert!(!reports.is_empty(), "nothing to combine");
        let n = reports.len() as f64;
        let mean = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let sum = |f: fn(&MetricsReport) -> u64| reports.iter().map(f).sum::<u64>();
        MetricsReport {
            avg_client_throughput_bps: mean(|r| r.avg_client_throughput_bps),
            avg_server_throughput_bps: mean(|r| r.avg_server_throughput_bps),
            avg_queue_len: mean(|r| r.avg_queue_len),
            peak_queue_len: mean(|r| r.peak_queue_len),
            avg_time_in_queue_s: mean(|r| r.avg_time_in_queue_s),
            messages_sent: sum(|r| r.messages_sent),
            messages_delivered: sum(|r| r.messages_delivered),
            messages_replaced: sum(|r| r.messages_replaced),
            messages_lost: sum(|r| r.messages_lost),
            final_queue_len: sum(|r| r.final_queue_len),
            messages_in_transit: sum(|r| r.messages_in_transit),
            acks_generated: sum(|r| r.acks_generated),
            retransmissions: sum(|r| r.retransmissions),
            run_duration_s: mean(|r| r.run_duration_s),
            littles_residual: mean(|r| r.littles_residual),
        }
    }
}

/// `|L - λW| / max(L, ε)`.
pub fn littles_law_residual(report: &MetricsReport, arrival_rate: f64) -> f64 {
    let l = report.avg_queue_len;
    (l - arrival_rate * report.avg_time_in_queue_s).abs() / l.max(LITTLE_EPSILON)
}
