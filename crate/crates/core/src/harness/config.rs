use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::queue::QueueMode;
use crate::sim::{LinkParams, SimConfig, TcpModel, TransportKind};
use crate::traffic::Schedule;

pub const DEFAULT_DESTINATIONS: u32 = 4;
pub const ONE_TO_ONE_DURATION_S: f64 = 180.0;
pub const ONE_TO_MANY_DURATION_S: f64 = 720.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    OneToOne,
    OneToMany(u32),
}

impl Topology {
    pub fn destinations(self) -> u32 {
        match self {
            Topology::OneToOne => 1,
            Topology::OneToMany(n) => n,
        }
    }

    pub fn default_duration_s(self) -> f64 {
        match self {
            Topology::OneToOne => ONE_TO_ONE_DURATION_S,
            Topology::OneToMany(_) => ONE_TO_MANY_DURATION_S,
        }
    }

    pub fn is_one_to_many(self) -> bool {
        matches!(self, Topology::OneToMany(_))
    }

    /// Stable id used in seed derivation.
    pub(crate) fn seed_word(self) -> u64 {
        match self {
            Topology::OneToOne => 1,
            Topology::OneToMany(n) => 0x100 | u64::from(n),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::OneToOne => f.write_str("one-to-one"),
            Topology::OneToMany(n) if *n == DEFAULT_DESTINATIONS => f.write_str("one-to-many"),
            Topology::OneToMany(n) => write!(f, "one-to-many:{n}"),
        }
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        let (name, count) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s.as_str(), None),
        };
        match (name, count) {
            ("one-to-one" | "1:1" | "o2o", None) => Ok(Topology::OneToOne),
            ("one-to-many" | "o2m", None) => Ok(Topology::OneToMany(DEFAULT_DESTINATIONS)),
            ("one-to-many" | "o2m", Some(n)) => {
                let n: u32 = n
                    .parse()
                    .map_err(|_| format!("bad destination count `{n}`"))?;
                if n == 0 {
                    return Err("one-to-many needs at least one destination".into());
                }
                Ok(Topology::OneToMany(n))
            }
            _ => Err(format!(
                "unknown topology `{s}` (expected one-to-one or one-to-many[:N])"
            )),
        }
    }
}

/// One experiment cell plus every knob of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: TransportKind,
    pub topology: Topology,
    pub packet_size_bytes: u32,
    pub receiver_delay_s: f64,
    pub messages_per_destination: u64,
    /// `None` picks the topology default (180 s or 720 s).
    pub run_duration_s: Option<f64>,
    pub seed: u64,
    pub link: LinkParams,
    pub tcp: TcpModel,
    pub queue_variant: QueueMode,
    pub schedule: Schedule,
    pub p_status: f64,
    pub uqa_overhead_s: f64,
    pub send_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: TransportKind::Tcp,
            topology: Topology::OneToOne,
            packet_size_bytes: 512,
            receiver_delay_s: 0.0,
            messages_per_destination: 1000,
            run_duration_s: None,
            seed: 0,
            link: LinkParams::default(),
            tcp: TcpModel::default(),
            queue_variant: QueueMode::TailOnly,
            schedule: Schedule::default(),
            p_status: 0.70,
            uqa_overhead_s: 0.001,
            send_fraction: 0.9,
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`], in print order.
pub const CONFIG_KEYS: &[&str] = &[
    "protocol",
    "topology",
    "packet_size",
    "receiver_delay",
    "messages",
    "duration",
    "seed",
    "loss",
    "bandwidth",
    "prop_delay",
    "window",
    "ack_size",
    "rto",
    "queue_variant",
    "schedule",
    "p_status",
    "uqa_overhead",
    "send_fraction",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot parse `{value}`")))
}

fn parse_text<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|e| ConfigError::new(key, e))
}

impl ExperimentConfig {
    pub fn duration_s(&self) -> f64 {
        self.run_duration_s
            .unwrap_or_else(|| self.topology.default_duration_s())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            transport: self.protocol,
            link: self.link,
            tcp: self.tcp,
            receiver_delay_s: self.receiver_delay_s,
            uqa_overhead_s: self.uqa_overhead_s,
            queue_variant: self.queue_variant,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.packet_size_bytes == 0 {
            return Err(ConfigError::new("packet_size", "must be positive"));
        }
        if !(self.receiver_delay_s.is_finite() && self.receiver_delay_s >= 0.0) {
            return Err(ConfigError::new("receiver_delay", "must be >= 0"));
        }
        if let Some(d) = self.run_duration_s {
            if !(d.is_finite() && d >= 0.0) {
                return Err(ConfigError::new("duration", "must be >= 0"));
            }
        }
        if self.topology.destinations() == 0 {
            return Err(ConfigError::new(
                "topology",
                "needs at least one destination",
            ));
        }
        if self.queue_variant == QueueMode::Fifo {
            return Err(ConfigError::new("queue_variant", "must be tail or keyed"));
        }
        if !(0.0..=1.0).contains(&self.p_status) {
            return Err(ConfigError::new("p_status", "must be within [0, 1]"));
        }
        if !(self.uqa_overhead_s.is_finite() && self.uqa_overhead_s >= 0.0) {
            return Err(ConfigError::new("uqa_overhead", "must be >= 0"));
        }
        if !(self.send_fraction > 0.0 && self.send_fraction <= 1.0) {
            return Err(ConfigError::new("send_fraction", "must be within (0, 1]"));
        }
        self.link.validate()?;
        self.tcp.validate()
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "protocol" => self.protocol = parse_text(&key, value)?,
            "topology" => self.topology = parse_text(&key, value)?,
            "destinations" => {
                let n: u32 = parse_num(&key, value)?;
                if n == 0 {
                    return Err(ConfigError::new(key, "must be >= 1"));
                }
                self.topology = Topology::OneToMany(n);
            }
            "packet_size" => self.packet_size_bytes = parse_num(&key, value)?,
            "receiver_delay" => self.receiver_delay_s = parse_num(&key, value)?,
            "messages" => self.messages_per_destination = parse_num(&key, value)?,
            "duration" => {
                self.run_duration_s = match value {
                    "" | "auto" => None,
                    v => Some(parse_num(&key, v)?),
                }
            }
            "seed" => self.seed = parse_num(&key, value)?,
            "loss" => self.link.loss_prob = parse_num(&key, value)?,
            "bandwidth" => self.link.bandwidth_bps = parse_num(&key, value)?,
            "prop_delay" => self.link.propagation_delay_s = parse_num(&key, value)?,
            "window" => self.tcp.window_size = parse_num(&key, value)?,
            "ack_size" => self.tcp.ack_size_bytes = parse_num(&key, value)?,
            "rto" => self.tcp.rto_s = parse_num(&key, value)?,
            "queue_variant" => self.queue_variant = parse_text(&key, value)?,
            "schedule" => self.schedule = parse_text(&key, value)?,
            "p_status" => self.p_status = parse_num(&key, value)?,
            "uqa_overhead" => self.uqa_overhead_s = parse_num(&key, value)?,
            "send_fraction" => self.send_fraction = parse_num(&key, value)?,
            _ => return Err(ConfigError::new(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies a line-oriented `key=value` file. Blank lines and `#`
    /// comments are ignored.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("line {}", i + 1), "expected key=value"))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Every setting as `key=value` lines, readable by [`Self::apply_file`].
    pub fn to_config_text(&self) -> String {
        let duration = match self.run_duration_s {
            Some(d) => d.to_string(),
            None => "auto".to_string(),
        };
        let values = [
            self.protocol.to_string(),
            self.topology.to_string(),
            self.packet_size_bytes.to_string(),
            self.receiver_delay_s.to_string(),
            self.messages_per_destination.to_string(),
            duration,
            self.seed.to_string(),
            self.link.loss_prob.to_string(),
            self.link.bandwidth_bps.to_string(),
            self.link.propagation_delay_s.to_string(),
            self.tcp.window_size.to_string(),
            self.tcp.ack_size_bytes.to_string(),
            self.tcp.rto_s.to_string(),
            self.queue_variant.to_string(),
            self.schedule.to_string(),
            self.p_status.to_string(),
            self.uqa_overhead_s.to_string(),
            self.send_fraction.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Short label naming the cell, used in error messages.
    pub fn cell_label(&self) -> String {
        format!(
            "{}/{}/{}B/{}s",
            self.protocol, self.topology, self.packet_size_bytes, self.receiver_delay_s
        )
    }
}
