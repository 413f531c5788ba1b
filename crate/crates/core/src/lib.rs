//! Updatable queue abstraction (status-coalescing receive queue) and a
//! deterministic discrete-event model for comparing TCP, UDP, TCP-UQA and
//! UDP-UQA delivery.

pub mod error;
pub mod harness;
pub mod message;
pub mod metrics;
pub mod queue;
pub mod rng;
pub mod sim;
pub mod traffic;

pub use error::{ConfigError, HarnessError, TraceError};
pub use message::{classify, same_sender_status_pair, Message, MessageKind, SenderId, TraceRecord};
pub use metrics::{littles_law_residual, MetricsCollector, MetricsReport};
pub use queue::{EnqueueOutcome, QueueMode, UpdatableQueue};
pub use sim::{LinkParams, SimClock, SimConfig, Simulation, TcpModel, TransportKind};
pub use traffic::{generate_schedule, Schedule, TrafficConfig, TrafficGenerator};
