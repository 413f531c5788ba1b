//! Python bindings: messages, the updatable queue, traffic generation and
//! single experiment runs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uqa_core::harness::{self, ExperimentConfig};
use uqa_core::traffic::{generate_schedule as gen_schedule, Schedule, TrafficConfig};
use uqa_core::{EnqueueOutcome, QueueMode, SenderId};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "MessageKind", eq, eq_int, frozen, from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PyMessageKind {
    Status,
    Command,
    Event,
}

impl From<PyMessageKind> for uqa_core::MessageKind {
    fn from(k: PyMessageKind) -> Self {
        match k {
            PyMessageKind::Status => uqa_core::MessageKind::Status,
            PyMessageKind::Command => uqa_core::MessageKind::Command,
            PyMessageKind::Event => uqa_core::MessageKind::Event,
        }
    }
}

impl From<uqa_core::MessageKind> for PyMessageKind {
    fn from(k: uqa_core::MessageKind) -> Self {
        match k {
            uqa_core::MessageKind::Status => PyMessageKind::Status,
            uqa_core::MessageKind::Command => PyMessageKind::Command,
            uqa_core::MessageKind::Event => PyMessageKind::Event,
        }
    }
}

#[pyclass(name = "Message", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMessage {
    inner: uqa_core::Message,
}

#[pymethods]
impl PyMessage {
    #[new]
    #[pyo3(signature = (seq, sender, kind, size_bytes=1, t_created=0.0))]
    fn new(
        seq: u64,
        sender: u32,
        kind: PyMessageKind,
        size_bytes: u32,
        t_created: f64,
    ) -> PyResult<Self> {
        if size_bytes == 0 {
            return Err(value_error("size_bytes must be positive"));
        }
        Ok(PyMessage {
            inner: uqa_core::Message::new(
                seq,
                SenderId(sender),
                kind.into(),
                size_bytes,
                t_created,
            ),
        })
    }

    #[getter]
    fn seq(&self) -> u64 {
        self.inner.seq
    }

    #[getter]
    fn sender(&self) -> u32 {
        self.inner.sender.0
    }

    #[getter]
    fn kind(&self) -> PyMessageKind {
        self.inner.kind.into()
    }

    #[getter]
    fn size_bytes(&self) -> u32 {
        self.inner.size_bytes
    }

    #[getter]
    fn t_created(&self) -> f64 {
        self.inner.t_created
    }

    #[getter]
    fn t_enqueued(&self) -> Option<f64> {
        self.inner.t_enqueued
    }

    #[getter]
    fn t_dequeued(&self) -> Option<f64> {
        self.inner.t_dequeued
    }

    fn __repr__(&self) -> String {
        format!(
            "Message(seq={}, sender={}, kind={}, size_bytes={})",
            self.inner.seq, self.inner.sender.0, self.inner.kind, self.inner.size_bytes
        )
    }
}

/// `(requires_ack, replaceable)` for a kind.
#[pyfunction]
fn classify(kind: PyMessageKind) -> (bool, bool) {
    uqa_core::classify(kind.into())
}

#[pyclass(name = "UpdatableQueue")]
pub struct PyQueue {
    inner: uqa_core::UpdatableQueue,
    mode: QueueMode,
}

#[pymethods]
impl PyQueue {
    /// `mode` is "fifo", "tail" or "keyed".
    #[new]
    #[pyo3(signature = (mode="tail"))]
    fn new(mode: &str) -> PyResult<Self> {
        Ok(PyQueue {
            inner: uqa_core::UpdatableQueue::new(),
            mode: mode.parse().map_err(value_error)?,
        })
    }

    #[getter]
    fn mode(&self) -> String {
        self.mode.to_string()
    }

    /// Returns "inserted", "replaced_tail" or "replaced_keyed".
    #[pyo3(signature = (message, now=0.0))]
    fn enqueue(&mut self, message: PyRef<'_, PyMessage>, now: f64) -> &'static str {
        match self.inner.enqueue(self.mode, message.inner.clone(), now) {
            EnqueueOutcome::Inserted => "inserted",
            EnqueueOutcome::ReplacedTail => "replaced_tail",
            EnqueueOutcome::ReplacedKeyed => "replaced_keyed",
        }
    }

    #[pyo3(signature = (now=0.0))]
    fn dequeue(&mut self, now: f64) -> Option<PyMessage> {
        self.inner.dequeue(now).map(|inner| PyMessage { inner })
    }

    /// Queue contents, head first.
    fn items(&self) -> Vec<PyMessage> {
        self.inner
            .iter()
            .map(|m| PyMessage { inner: m.clone() })
            .collect()
    }

    #[getter]
    fn inserted(&self) -> u64 {
        self.inner.inserted()
    }

    #[getter]
    fn replaced(&self) -> u64 {
        self.inner.replaced()
    }

    #[getter]
    fn dequeued(&self) -> u64 {
        self.inner.dequeued()
    }

    fn is_conserved(&self) -> bool {
        self.inner.is_conserved()
    }

    fn adjacency_holds(&self) -> bool {
        self.inner.adjacency_holds()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// List of `(t_send, Message)` pairs.
#[pyfunction]
#[pyo3(signature = (message_count, seed, p_status=0.7, packet_size_bytes=512, schedule="burst", run_duration_s=180.0))]
fn generate_schedule(
    message_count: u64,
    seed: u64,
    p_status: f64,
    packet_size_bytes: u32,
    schedule: &str,
    run_duration_s: f64,
) -> PyResult<Vec<(f64, PyMessage)>> {
    let schedule: Schedule = schedule.parse().map_err(value_error)?;
    let config = TrafficConfig {
        message_count,
        p_status,
        packet_size_bytes,
        schedule,
        run_duration_s,
        seed,
        ..TrafficConfig::default()
    };
    config.validate().map_err(value_error)?;
    Ok(gen_schedule(&config)
        .into_iter()
        .map(|r| (r.t_send, PyMessage { inner: r.message }))
        .collect())
}

/// Runs one cell. Keyword arguments are configuration keys as accepted by
/// the `uqa` CLI config files, e.g. `protocol="tcp-uqa", receiver_delay=0.05`.
#[pyfunction]
#[pyo3(signature = (**settings))]
fn run_experiment<'py>(
    py: Python<'py>,
    settings: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = ExperimentConfig::default();
    if let Some(settings) = settings {
        for (k, v) in settings.iter() {
            let key: String = k.extract()?;
            let value = v.str()?.to_string();
            config.set(&key, &value).map_err(value_error)?;
        }
    }
    let outcome = harness::run_experiment(&config).map_err(value_error)?;
    let r = &outcome.report;
    let out = PyDict::new(py);
    out.set_item("protocol", config.protocol.to_string())?;
    out.set_item("topology", config.topology.to_string())?;
    out.set_item("packet_size_bytes", config.packet_size_bytes)?;
    out.set_item("receiver_delay_s", config.receiver_delay_s)?;
    out.set_item("seed", config.seed)?;
    out.set_item("messages_sent", r.messages_sent)?;
    out.set_item("messages_delivered", r.messages_delivered)?;
    out.set_item("messages_replaced", r.messages_replaced)?;
    out.set_item("messages_lost", r.messages_lost)?;
    out.set_item("messages_in_transit", r.messages_in_transit)?;
    out.set_item("final_queue_len", r.final_queue_len)?;
    out.set_item("acks_generated", r.acks_generated)?;
    out.set_item("retransmissions", r.retransmissions)?;
    out.set_item("avg_client_throughput_bps", r.avg_client_throughput_bps)?;
    out.set_item("avg_server_throughput_bps", r.avg_server_throughput_bps)?;
    out.set_item("avg_queue_len", r.avg_queue_len)?;
    out.set_item("peak_queue_len", r.peak_queue_len)?;
    out.set_item("avg_time_in_queue_s", r.avg_time_in_queue_s)?;
    out.set_item("littles_residual", r.littles_residual)?;
    out.set_item("run_duration_s", r.run_duration_s)?;
    out.set_item("conserved", r.is_conserved())?;
    Ok(out)
}

#[pymodule]
pub fn uqa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMessageKind>()?;
    m.add_class::<PyMessage>()?;
    m.add_class::<PyQueue>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(generate_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
