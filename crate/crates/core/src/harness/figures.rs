use std::path::{Path, PathBuf};

use super::csv::{document, fmt_g6};
use super::sweep::{AggregateMeans, SweepResult};
use crate::error::HarnessError;
use crate::sim::TransportKind;

/// Which metric and topology a figure table shows.
#[derive(Debug, Clone, Copy)]
pub struct FigureSpec {
    pub id: u32,
    pub title: &'static str,
    pub one_to_many: bool,
    pub metric: fn(&AggregateMeans) -> f64,
}

pub const FIGURES: [FigureSpec; 8] = [
    FigureSpec {
        id: 6,
        title: "one-to-one average client throughput (bit/s)",
        one_to_many: false,
        metric: |m| m.avg_client_throughput_bps,
    },
    FigureSpec {
        id: 7,
        title: "one-to-one average server throughput (bit/s)",
        one_to_many: false,
        metric: |m| m.avg_server_throughput_bps,
    },
    FigureSpec {
        id: 8,
        title: "one-to-one average queue length",
        one_to_many: false,
        metric: |m| m.avg_queue_len,
    },
    FigureSpec {
        id: 9,
        title: "one-to-one average peak queue size",
        one_to_many: false,
        metric: |m| m.peak_queue_len,
    },
    FigureSpec {
        id: 10,
        title: "one-to-one average time in queue (s)",
        one_to_many: false,
        metric: |m| m.avg_time_in_queue_s,
    },
    FigureSpec {
        id: 11,
        title: "one-to-many average queue length",
        one_to_many: true,
        metric: |m| m.avg_queue_len,
    },
    FigureSpec {
        id: 12,
        title: "one-to-many average peak queue size",
        one_to_many: true,
        metric: |m| m.peak_queue_len,
    },
    FigureSpec {
        id: 13,
        title: "one-to-many average time in queue (s)",
        one_to_many: true,
        metric: |m| m.avg_time_in_queue_s,
    },
];

pub fn figure_spec(id: u32) -> Result<&'static FigureSpec, HarnessError> {
    FIGURES
        .iter()
        .find(|f| f.id == id)
        .ok_or(HarnessError::UnknownFigure(id))
}

/// CSV table for one figure: `receiver_delay_s` then one column per
/// protocol, values averaged over packet sizes.
pub fn figure_table(sweep: &SweepResult, id: u32) -> Result<String, HarnessError> {
    let spec = figure_spec(id)?;
    let agg = sweep.aggregate();
    let mut delays: Vec<f64> = Vec::new();
    for row in agg
        .iter()
        .filter(|r| r.topology.is_one_to_many() == spec.one_to_many)
    {
        if !delays.contains(&row.receiver_delay_s) {
            delays.push(row.receiver_delay_s);
        }
    }
    let header = std::iter::once("receiver_delay_s".to_string())
        .chain(TransportKind::ALL.iter().map(|p| p.to_string()))
        .collect::<Vec<_>>()
        .join(",");
    let rows = delays.iter().map(|&delay| {
        let mut line = fmt_g6(delay);
        for p in TransportKind::ALL {
            line.push(',');
            let cell = agg.iter().find(|r| {
                r.protocol == p
                    && r.receiver_delay_s == delay
                    && r.topology.is_one_to_many() == spec.one_to_many
            });
            if let Some(r) = cell {
                line.push_str(&fmt_g6((spec.metric)(&r.means)));
            }
        }
        line
    });
    Ok(document(&header, rows))
}

/// Writes `figNN.csv` into `dir` and returns its path.
pub fn emit_figure_data(sweep: &SweepResult, id: u32, dir: &Path) -> Result<PathBuf, HarnessError> {
    let table = figure_table(sweep, id)?;
    let path = dir.join(format!("fig{id:02}.csv"));
    std::fs::write(&path, table).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}
