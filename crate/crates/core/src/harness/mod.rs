//! Experiment harness: single cells, the full protocol × size × delay ×
//! topology sweep, CSV output and per-figure tables.

mod config;
pub mod csv;
mod figures;
mod sweep;

pub use config::{
    ExperimentConfig, Topology, CONFIG_KEYS, DEFAULT_DESTINATIONS, ONE_TO_MANY_DURATION_S,
    ONE_TO_ONE_DURATION_S,
};
pub use figures::{emit_figure_data, figure_spec, figure_table, FigureSpec, FIGURES};
pub use sweep::{cell_seed, run_sweep, AggregateMeans, AggregateRow, SweepResult, SweepSpec};

use crate::error::HarnessError;
use crate::message::{SenderId, TraceRecord};
use crate::metrics::MetricsReport;
use crate::rng::derive_seed;
use crate::sim::Simulation;
use crate::traffic::{generate_schedule, TrafficConfig};

/// Result of one cell: the combined report plus one report per destination.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub report: MetricsReport,
    pub per_destination: Vec<MetricsReport>,
}

/// Seed for destination `d` of a cell seeded with `seed`.
pub fn destination_seed(seed: u64, dest: u32) -> u64 {
    derive_seed(&[seed, u64::from(dest)])
}

/// Per-destination traffic for a config.
pub fn schedules_for(config: &ExperimentConfig) -> Vec<Vec<TraceRecord>> {
    (0..config.topology.destinations())
        .map(|d| {
            generate_schedule(&TrafficConfig {
                message_count: config.messages_per_destination,
                p_status: config.p_status,
                packet_size_bytes: config.packet_size_bytes,
                sender: SenderId(0),
                schedule: config.schedule,
                run_duration_s: config.duration_s(),
                send_fraction: config.send_fraction,
                seed: destination_seed(config.seed, d),
            })
        })
        .collect()
}

/// Builds and runs one cell to its configured duration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    let schedules = schedules_for(config);
    let seeds: Vec<u64> = (0..config.topology.destinations())
        .map(|d| destination_seed(config.seed, d))
        .collect();
    let duration = config.duration_s();
    let mut sim = Simulation::new(config.sim_config(), &schedules, &seeds);
    sim.run(duration);
    let per_destination = sim.reports(duration);
    let report = if per_destination.len() == 1 {
        per_destination[0].clone()
    } else {
        MetricsReport::combine(&per_destination)
    };
    Ok(ExperimentOutcome {
        config: config.clone(),
        report,
        per_destination,
    })
}
