//! Seeded message generator: each message is a status update with
//! probability `p_status`, otherwise a command or an event with equal odds.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::ConfigError;
use crate::message::{Message, MessageKind, SenderId, TraceRecord};
use crate::rng::{stream_rng, SimRng};

/// Minimum separation between consecutive send times.
pub const SEND_EPSILON: f64 = 1e-9;
/// Spacing of back-to-back sends in burst mode.
pub const BURST_SPACING: f64 = 1e-6;

const KIND_STREAM: u64 = 0;
const TIMING_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Schedule {
    /// Evenly spaced over the send window.
    Uniform,
    /// Exponential gaps with the uniform mean.
    Poisson,
    /// Everything handed to the transport at once; the link paces it.
    #[default]
    Burst,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Uniform => "uniform",
            Schedule::Poisson => "poisson",
            Schedule::Burst => "burst",
        })
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Schedule::Uniform),
            "poisson" => Ok(Schedule::Poisson),
            "burst" => Ok(Schedule::Burst),
            other => Err(format!(
                "unknown schedule `{other}` (expected uniform, poisson or burst)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub message_count: u64,
    pub p_status: f64,
    pub packet_size_bytes: u32,
    pub sender: SenderId,
    pub schedule: Schedule,
    pub run_duration_s: f64,
    /// Share of the run in which sends happen; the rest is drain headroom.
    pub send_fraction: f64,
    pub seed: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            message_count: 1000,
            p_status: 0.70,
            packet_size_bytes: 512,
            sender: SenderId(0),
            schedule: Schedule::default(),
            run_duration_s: 180.0,
            send_fraction: 0.9,
            seed: 0,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_status) {
            return Err(ConfigError::new("p_status", "must be within [0, 1]"));
        }
        if self.packet_size_bytes == 0 {
            return Err(ConfigError::new("packet_size", "must be positive"));
        }
        if !self.run_duration_s.is_finite() || self.run_duration_s < 0.0 {
            return Err(ConfigError::new(
                "duration",
                "must be a non-negative number of seconds",
            ));
        }
        if !(self.send_fraction > 0.0 && self.send_fraction <= 1.0) {
            return Err(ConfigError::new("send_fraction", "must be within (0, 1]"));
        }
        Ok(())
    }

    /// End of the send window.
    pub fn send_horizon(&self) -> f64 {
        self.run_duration_s * self.send_fraction
    }

    /// Mean gap between sends for uniform and Poisson schedules.
    pub fn mean_gap(&self) -> f64 {
        if self.message_count == 0 {
            0.0
        } else {
            self.send_horizon() / self.message_count as f64
        }
    }
}

/// Draws messages one at a time; seq numbers start at 1.
pub struct TrafficGenerator {
    config: TrafficConfig,
    rng: SimRng,
    next_seq: u64,
}

impl TrafficGenerator {
    pub fn new(config: TrafficConfig) -> Self {
        let rng = stream_rng(config.seed, KIND_STREAM);
        TrafficGenerator {
            config,
            rng,
            next_seq: 1,
        }
    }

    pub fn config(&self) -> &TrafficConfig {
        &self.config
    }

    pub fn next_kind(&mut self) -> MessageKind {
        let p = self.config.p_status;
        let u: f64 = self.rng.random();
        if u < p {
            MessageKind::Status
        } else if u < p + (1.0 - p) / 2.0 {
            MessageKind::Command
        } else {
            MessageKind::Event
        }
    }

    pub fn next_message(&mut self, t_created: f64) -> Message {
        let kind = self.next_kind();
        let seq = self.next_seq;
        self.next_seq += 1;
        Message::new(
            seq,
            self.config.sender,
            kind,
            self.config.packet_size_bytes,
            t_created,
        )
    }
}

fn send_times(config: &TrafficConfig) -> Vec<f64> {
    let n = config.message_count as usize;
    let mut times = Vec::with_capacity(n);
    match config.schedule {
        Schedule::Uniform => {
            let gap = config.mean_gap();
            times.extend((0..n).map(|i| i as f64 * gap));
        }
        Schedule::Burst => {
            times.extend((0..n).map(|i| i as f64 * BURST_SPACING));
        }
        Schedule::Poisson => {
            let horizon = config.send_horizon();
            let mean = config.mean_gap();
            let mut rng = stream_rng(config.seed, TIMING_STREAM);
            let mut t = 0.0;
            if mean > 0.0 {
                let exp = Exp::new(1.0 / mean).expect("positive rate");
                for _ in 0..n {
                    t += exp.sample(&mut rng);
                    // Whatever does not fit goes out back to back at the horizon.
                    times.push(t.min(horizon));
                }
            } else {
                times.resize(n, 0.0);
            }
        }
    }
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            times[i] = times[i - 1] + SEND_EPSILON;
        }
    }
    times
}

/// Full send schedule, ordered by send time.
pub fn generate_schedule(config: &TrafficConfig) -> Vec<TraceRecord> {
    let mut gen = TrafficGenerator::new(config.clone());
    send_times(config)
        .into_iter()
        .map(|t| TraceRecord::new(t, gen.next_message(t)))
        .collect()
}
