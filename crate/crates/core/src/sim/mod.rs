//! Deterministic discrete-event model of a source talking to one or more
//! receivers over TCP-like or UDP-like transports.

mod clock;
mod engine;
mod receiver;

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::queue::QueueMode;

pub use clock::{EventHandle, SimClock};
pub use engine::{replay, SimConfig, Simulation};
pub use receiver::Receiver;

/// Point-to-point link parameters. Loss applies per data packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub propagation_delay_s: f64,
    pub bandwidth_bps: f64,
    pub loss_prob: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            propagation_delay_s: 0.010,
            bandwidth_bps: 1_000_000.0,
            loss_prob: 0.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.propagation_delay_s.is_finite() && self.propagation_delay_s >= 0.0) {
            return Err(ConfigError::new("prop_delay", "must be >= 0"));
        }
        if !(self.bandwidth_bps.is_finite() && self.bandwidth_bps > 0.0) {
            return Err(ConfigError::new("bandwidth", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(ConfigError::new("loss", "must be within [0, 1]"));
        }
        Ok(())
    }

    /// Time to clock `bytes` onto the wire.
    pub fn serialization_s(&self, bytes: u32) -> f64 {
        f64::from(bytes) * 8.0 / self.bandwidth_bps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransportKind {
    Tcp,
    Udp,
    TcpUqa,
    UdpUqa,
}

impl TransportKind {
    pub const ALL: [TransportKind; 4] = [
        TransportKind::Tcp,
        TransportKind::Udp,
        TransportKind::TcpUqa,
        TransportKind::UdpUqa,
    ];

    pub fn is_reliable(self) -> bool {
        matches!(self, TransportKind::Tcp | TransportKind::TcpUqa)
    }

    pub fn uses_uqa(self) -> bool {
        matches!(self, TransportKind::TcpUqa | TransportKind::UdpUqa)
    }

    /// Queue insertion mode at the receiver; `variant` picks the coalescing
    /// flavor for the UQA transports.
    pub fn queue_mode(self, variant: QueueMode) -> QueueMode {
        if self.uses_uqa() {
            variant
        } else {
            QueueMode::Fifo
        }
    }
}

impl fmt::Display for TransportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransportKind::Tcp => "TCP",
            TransportKind::Udp => "UDP",
            TransportKind::TcpUqa => "TCP-UQA",
            TransportKind::UdpUqa => "UDP-UQA",
        })
    }
}

impl FromStr for TransportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "tcp" => Ok(TransportKind::Tcp),
            "udp" => Ok(TransportKind::Udp),
            "tcp-uqa" => Ok(TransportKind::TcpUqa),
            "udp-uqa" => Ok(TransportKind::UdpUqa),
            other => Err(format!(
                "unknown protocol `{other}` (expected tcp, udp, tcp-uqa or udp-uqa)"
            )),
        }
    }
}

/// Fixed-window, per-packet-ack TCP abstraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpModel {
    pub window_size: u32,
    pub ack_size_bytes: u32,
    pub rto_s: f64,
}

impl Default for TcpModel {
    fn default() -> Self {
        TcpModel {
            window_size: 4,
            ack_size_bytes: 40,
            rto_s: 1.0,
        }
    }
}

impl TcpModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_size == 0 {
            return Err(ConfigError::new("window", "must be >= 1"));
        }
        if self.ack_size_bytes == 0 {
            return Err(ConfigError::new("ack_size", "must be > 0"));
        }
        if !(self.rto_s.is_finite() && self.rto_s > 0.0) {
            return Err(ConfigError::new("rto", "must be > 0"));
        }
        Ok(())
    }
}
