use crate::message::Message;
use crate::metrics::MetricsCollector;
use crate::queue::{QueueMode, UpdatableQueue};

/// Application end of a connection: drains its queue one message at a time
/// and stays busy for `delay_s` after each dequeue. Coalescing inserts cost
/// `uqa_overhead_s` of extra busy time each.
///
/// When an arrival and a dequeue fall on the same instant the dequeue runs
/// first.
#[derive(Debug, Clone)]
pub struct Receiver {
    queue: UpdatableQueue,
    mode: QueueMode,
    delay_s: f64,
    uqa_overhead_s: f64,
    busy_until: f64,
    wake_pending: bool,
    delivered: Vec<Message>,
}

impl Receiver {
    pub fn new(delay_s: f64, mode: QueueMode, uqa_overhead_s: f64) -> Self {
        assert!(delay_s >= 0.0, "receiver delay must be >= 0");
        assert!(uqa_overhead_s >= 0.0, "overhead must be >= 0");
        Receiver {
            queue: UpdatableQueue::new(),
            mode,
            delay_s,
            uqa_overhead_s,
            busy_until: 0.0,
            wake_pending: false,
            delivered: Vec::new(),
        }
    }

    pub fn queue(&self) -> &UpdatableQueue {
        &self.queue
    }

    pub fn mode(&self) -> QueueMode {
        self.mode
    }

    /// Messages handed to the application, in dequeue order.
    pub fn delivered(&self) -> &[Message] {
        &self.delivered
    }

    /// Processing time spent on each insert.
    pub fn enqueue_cost(&self) -> f64 {
        match self.mode {
            QueueMode::Fifo => 0.0,
            QueueMode::TailOnly | QueueMode::Keyed => self.uqa_overhead_s,
        }
    }

    /// Accepts a message from the transport. Returns a time at which
    /// [`Receiver::wake`] must be called, if any.
    pub fn arrive(
        &mut self,
        now: f64,
        msg: Message,
        metrics: &mut MetricsCollector,
    ) -> Option<f64> {
        self.pump(now, metrics);
        if self.queue.enqueue(self.mode, msg, now).replaced() {
            metrics.messages_replaced += 1;
        }
        let cost = self.enqueue_cost();
        if cost > 0.0 {
            self.busy_until = self.busy_until.max(now) + cost;
        }
        metrics.record_queue_sample(now, self.queue.len());
        self.pump(now, metrics);
        self.wake_request()
    }

    pub fn wake(&mut self, now: f64, metrics: &mut MetricsCollector) -> Option<f64> {
        self.wake_pending = false;
        self.pump(now, metrics);
        self.wake_request()
    }

    fn pump(&mut self, now: f64, metrics: &mut MetricsCollector) {
        while self.busy_until <= now {
            let Some(msg) = self.queue.dequeue(now) else {
                break;
            };
            metrics.record_delivery(msg.time_in_queue().unwrap_or(0.0));
            metrics.record_queue_sample(now, self.queue.len());
            self.busy_until = now + self.delay_s;
            self.delivered.push(msg);
        }
    }

    fn wake_request(&mut self) -> Option<f64> {
        if self.queue.is_empty() || self.wake_pending {
            return None;
        }
        self.wake_pending = true;
        Some(self.busy_until)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimClock;

    /// Feeds arrivals at the given times and returns the queue-length samples
    /// observed right after each arrival is processed.
    fn drive(
        rx: &mut Receiver,
        arrivals: Vec<(f64, Message)>,
        until: f64,
    ) -> (Vec<usize>, MetricsCollector) {
        enum Ev {
            Arrive(Message),
            Wake,
        }
        let mut clock = SimClock::new();
        for (t, m) in arrivals {
            clock.schedule(t, Ev::Arrive(m));
        }
        let mut metrics = MetricsCollector::new();
        let mut lens = Vec::new();
        clock.run(until, |c, t, ev| {
            let wake = match ev {
                Ev::Arrive(m) => {
                    let w = rx.arrive(t, m, &mut metrics);
                    lens.push(rx.queue().len());
                    w
                }
                Ev::Wake => rx.wake(t, &mut metrics),
            };
            if let Some(w) = wake {
                c.schedule(w, Ev::Wake);
            }
        });
        (lens, metrics)
    }

    #[test]
    fn zero_delay_drains_immediately() {
        let mut rx = Receiver::new(0.0, QueueMode::Fifo, 0.0);
        let arrivals = (0..10)
            .map(|i| (i as f64 * 0.01, Message::status(1, i + 1)))
            .collect();
        let (lens, m) = drive(&mut rx, arrivals, 1.0);
        assert!(lens.iter().all(|&l| l <= 1));
        assert_eq!(m.messages_delivered, 10);
        assert_eq!(m.queue.peak(), 1);
    }

    #[test]
    fn fifo_backlog_grows_at_rate_difference() {
        // Arrivals at 20/s, service at 10/s: the backlog gains one message
        // every 0.1 s.
        let mut rx = Receiver::new(0.1, QueueMode::Fifo, 0.0);
        let arrivals = (0..200)
            .map(|i| (i as f64 * 0.05, Message::status(1, i + 1)))
            .collect();
        let (lens, _) = drive(&mut rx, arrivals, 10.0);
        // After arrival k (time 0.05k) roughly k/2 messages have been served.
        let last = *lens.last().unwrap();
        assert!((98..=101).contains(&last), "{last}");
    }

    #[test]
    fn uqa_single_sender_status_stays_bounded() {
        let mut rx = Receiver::new(0.1, QueueMode::TailOnly, 0.0);
        let arrivals = (0..200)
            .map(|i| (i as f64 * 0.05, Message::status(1, i + 1)))
            .collect();
        let (_, m) = drive(&mut rx, arrivals, 20.0);
        assert!(m.queue.peak() <= 1);
        assert!(m.messages_replaced > 0);
    }

    #[test]
    fn dequeue_runs_before_simultaneous_arrival() {
        // The second message waits until 0.1, exactly when the third lands.
        let mut rx = Receiver::new(0.1, QueueMode::Fifo, 0.0);
        let arrivals = vec![
            (0.0, Message::status(1, 1)),
            (0.05, Message::status(1, 2)),
            (0.1, Message::status(1, 3)),
        ];
        let (lens, m) = drive(&mut rx, arrivals, 1.0);
        assert_eq!(lens, vec![0, 1, 1]);
        assert_eq!(m.queue.peak(), 1);
    }

    #[test]
    fn overhead_delays_service() {
        let mut rx = Receiver::new(0.0, QueueMode::TailOnly, 0.001);
        let (_, m) = drive(&mut rx, vec![(0.0, Message::command(1, 1))], 1.0);
        assert_eq!(rx.delivered()[0].t_dequeued, Some(0.001));
        assert_eq!(m.messages_delivered, 1);
    }
}
