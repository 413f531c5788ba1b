use rayon::prelude::*;

use super::csv;
use super::{run_experiment, ExperimentConfig, ExperimentOutcome, Topology, DEFAULT_DESTINATIONS};
use crate::error::HarnessError;
use crate::metrics::MetricsReport;
use crate::rng::derive_seed;
use crate::sim::TransportKind;

/// The experiment matrix. Cells are enumerated in canonical order:
/// protocol, topology, packet size, receiver delay.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub protocols: Vec<TransportKind>,
    pub topologies: Vec<Topology>,
    pub packet_sizes: Vec<u32>,
    pub receiver_delays: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            protocols: TransportKind::ALL.to_vec(),
            topologies: vec![
                Topology::OneToOne,
                Topology::OneToMany(DEFAULT_DESTINATIONS),
            ],
            packet_sizes: vec![32, 256, 512],
            receiver_delays: vec![0.0, 0.033, 0.05, 0.1],
        }
    }
}

/// Seed of one cell. Protocol is not an input, so the four
/// protocols of a (topology, size, delay) cell see identical traffic.
pub fn cell_seed(master: u64, topology: Topology, packet_size: u32, receiver_delay_s: f64) -> u64 {
    derive_seed(&[
        master,
        topology.seed_word(),
        u64::from(packet_size),
        receiver_delay_s.to_bits(),
    ])
}

impl SweepSpec {
    pub fn cells(&self, base: &ExperimentConfig, master_seed: u64) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &protocol in &self.protocols {
            for &topology in &self.topologies {
                for &size in &self.packet_sizes {
                    for &delay in &self.receiver_delays {
                        out.push(ExperimentConfig {
                            protocol,
                            topology,
                            packet_size_bytes: size,
                            receiver_delay_s: delay,
                            seed: cell_seed(master_seed, topology, size, delay),
                            ..base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

/// Means over the packet sizes of one (protocol, topology, delay) group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateMeans {
    pub messages_sent: f64,
    pub messages_delivered: f64,
    pub messages_replaced: f64,
    pub messages_lost: f64,
    pub acks_generated: f64,
    pub avg_client_throughput_bps: f64,
    pub avg_server_throughput_bps: f64,
    pub avg_queue_len: f64,
    pub peak_queue_len: f64,
    pub avg_time_in_queue_s: f64,
    pub littles_residual: f64,
}

impl AggregateMeans {
    fn of(reports: &[&MetricsReport]) -> Self {
        let n = reports.len() as f64;
        let mean =
            |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
        AggregateMeans {
            messages_sent: mean(&|r| r.messages_sent as f64),
            messages_delivered: mean(&|r| r.messages_delivered as f64),
            messages_replaced: mean(&|r| r.messages_replaced as f64),
            messages_lost: mean(&|r| r.messages_lost as f64),
            acks_generated: mean(&|r| r.acks_generated as f64),
            avg_client_throughput_bps: mean(&|r| r.avg_client_throughput_bps),
            avg_server_throughput_bps: mean(&|r| r.avg_server_throughput_bps),
            avg_queue_len: mean(&|r| r.avg_queue_len),
            peak_queue_len: mean(&|r| r.peak_queue_len),
            avg_time_in_queue_s: mean(&|r| r.avg_time_in_queue_s),
            littles_residual: mean(&|r| r.littles_residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub protocol: TransportKind,
    pub topology: Topology,
    pub receiver_delay_s: f64,
    /// Number of packet-size cells averaged.
    pub cells: usize,
    pub means: AggregateMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<ExperimentOutcome>,
}

impl SweepResult {
    /// Rows grouped by (protocol, topology, delay), averaged over packet
    /// size, in canonical order.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out: Vec<AggregateRow> = Vec::new();
        let mut keys: Vec<(TransportKind, Topology, f64)> = Vec::new();
        for r in &self.rows {
            let k = (
                r.config.protocol,
                r.config.topology,
                r.config.receiver_delay_s,
            );
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        for (protocol, topology, delay) in keys {
            let group: Vec<&MetricsReport> = self
                .rows
                .iter()
                .filter(|r| {
                    r.config.protocol == protocol
                        && r.config.topology == topology
                        && r.config.receiver_delay_s == delay
                })
                .map(|r| &r.report)
                .collect();
            out.push(AggregateRow {
                protocol,
                topology,
                receiver_delay_s: delay,
                cells: group.len(),
                means: AggregateMeans::of(&group),
            });
        }
        out
    }

    pub fn to_csv(&self) -> String {
        csv::document(
            csv::RESULT_HEADER,
            self.rows
                .iter()
                .map(|r| csv::result_row(&r.config, &r.report)),
        )
    }

    pub fn aggregate_csv(&self) -> String {
        csv::document(
            csv::AGGREGATE_HEADER,
            self.aggregate().iter().map(csv::aggregate_row),
        )
    }

    /// One row per destination of every cell.
    pub fn destinations_csv(&self) -> String {
        csv::document(
            csv::DESTINATION_HEADER,
            self.rows.iter().flat_map(|r| {
                r.per_destination
                    .iter()
                    .enumerate()
                    .map(move |(d, rep)| csv::destination_row(&r.config, d, rep))
            }),
        )
    }
}

/// Runs every cell of `spec` in parallel; output order is canonical
/// regardless of scheduling. The first failing cell aborts the sweep.
pub fn run_sweep(
    spec: &SweepSpec,
    base: &ExperimentConfig,
    master_seed: u64,
) -> Result<SweepResult, HarnessError> {
    let cells = spec.cells(base, master_seed);
    let rows = cells
        .par_iter()
        .map(|cfg| {
            run_experiment(cfg).map_err(|e| HarnessError::Cell {
                cell: cfg.cell_label(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { rows })
}
