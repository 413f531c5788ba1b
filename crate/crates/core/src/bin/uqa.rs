use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uqa_core::harness::{
    self, csv, emit_figure_data, run_experiment, run_sweep, ExperimentConfig, SweepSpec, FIGURES,
};
use uqa_core::message::{parse_trace, write_trace, TraceRecord};
use uqa_core::queue::QueueMode;
use uqa_core::sim::replay;
use uqa_core::HarnessError;

#[derive(Parser)]
#[command(
    name = "uqa",
    version,
    about = "Updatable queue experiments over modeled TCP and UDP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment cell and print its CSV row.
    Run {
        #[command(flatten)]
        opts: Opts,
        /// Print one row per destination instead of the combined row.
        #[arg(long)]
        per_destination: bool,
    },
    /// Run the protocol × topology × packet size × delay matrix.
    Sweep {
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the sweep and write one CSV per figure (6..13).
    Figures {
        #[command(flatten)]
        opts: Opts,
        /// Figure id; repeatable. Defaults to all.
        #[arg(long = "figure")]
        figures: Vec<u32>,
    },
    /// Feed a trace file straight into a receiver queue and report.
    Replay {
        /// Trace file with `t_send,sender_id,seq,kind,size_bytes` lines.
        trace: PathBuf,
        /// fifo, tail or keyed.
        #[arg(long, default_value = "tail")]
        queue_variant: String,
        #[arg(long, default_value_t = 0.0)]
        receiver_delay: f64,
        #[arg(long, default_value_t = 0.0)]
        uqa_overhead: f64,
        /// Stop time; defaults to when the last message could be drained.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    /// tcp, udp, tcp-uqa or udp-uqa. Restricts the matrix for sweeps.
    #[arg(long)]
    protocol: Option<String>,
    /// one-to-one or one-to-many[:N]. Restricts the matrix for sweeps.
    #[arg(long)]
    topology: Option<String>,
    /// Bytes per message. Restricts the matrix for sweeps.
    #[arg(long)]
    packet_size: Option<u32>,
    /// Seconds of receiver work per message. Restricts the matrix for sweeps.
    #[arg(long)]
    receiver_delay: Option<f64>,
    /// Messages per destination.
    #[arg(long)]
    messages: Option<u64>,
    /// Run length in seconds (default 180 one-to-one, 720 one-to-many).
    #[arg(long)]
    duration: Option<f64>,
    /// Cell seed for `run`, master seed for `sweep` and `figures`.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-packet loss probability.
    #[arg(long)]
    loss: Option<f64>,
    /// TCP window in packets.
    #[arg(long)]
    window: Option<u32>,
    /// tail or keyed coalescing for the UQA protocols.
    #[arg(long)]
    queue_variant: Option<String>,
    /// burst, uniform or poisson.
    #[arg(long)]
    schedule: Option<String>,
    /// Output file (`run`) or directory (`sweep`, `figures`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any other setting as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

struct Resolved {
    config: ExperimentConfig,
    spec: SweepSpec,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn resolve(opts: &Opts) -> Result<Resolved, HarnessError> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &opts.config {
        config.apply_file(&read(path)?)?;
    }
    for kv in &opts.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| uqa_core::ConfigError::new(kv.clone(), "expected key=value"))?;
        config.set(k, v)?;
    }
    let mut spec = SweepSpec::default();
    let flags: [(&str, Option<String>); 11] = [
        ("protocol", opts.protocol.clone()),
        ("topology", opts.topology.clone()),
        ("packet_size", opts.packet_size.map(|v| v.to_string())),
        ("receiver_delay", opts.receiver_delay.map(|v| v.to_string())),
        ("messages", opts.messages.map(|v| v.to_string())),
        ("duration", opts.duration.map(|v| v.to_string())),
        ("seed", opts.seed.map(|v| v.to_string())),
        ("loss", opts.loss.map(|v| v.to_string())),
        ("window", opts.window.map(|v| v.to_string())),
        ("queue_variant", opts.queue_variant.clone()),
        ("schedule", opts.schedule.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    if opts.protocol.is_some() {
        spec.protocols = vec![config.protocol];
    }
    if opts.topology.is_some() {
        spec.topologies = vec![config.topology];
    }
    if opts.packet_size.is_some() {
        spec.packet_sizes = vec![config.packet_size_bytes];
    }
    if opts.receiver_delay.is_some() {
        spec.receiver_delays = vec![config.receiver_delay_s];
    }
    config.validate()?;
    Ok(Resolved { config, spec })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            opts,
            per_destination,
        } => {
            let r = resolve(&opts)?;
            if opts.print_config {
                print!("{}", r.config.to_config_text());
                return Ok(());
            }
            let outcome = run_experiment(&r.config)?;
            let text = if per_destination {
                csv::document(
                    csv::DESTINATION_HEADER,
                    outcome
                        .per_destination
                        .iter()
                        .enumerate()
                        .map(|(d, rep)| csv::destination_row(&outcome.config, d, rep)),
                )
            } else {
                csv::document(
                    csv::RESULT_HEADER,
                    [csv::result_row(&outcome.config, &outcome.report)],
                )
            };
            emit(opts.out.as_deref(), &text)
        }
        Command::Sweep { opts } => {
            let r = resolve(&opts)?;
            if opts.print_config {
                print!("{}", r.config.to_config_text());
                return Ok(());
            }
            let sweep = run_sweep(&r.spec, &r.config, r.config.seed)?;
            match &opts.out {
                Some(dir) => {
                    write(&dir.join("sweep.csv"), &sweep.to_csv())?;
                    write(&dir.join("aggregate.csv"), &sweep.aggregate_csv())?;
                    write(&dir.join("destinations.csv"), &sweep.destinations_csv())?;
                    eprintln!("wrote {} cells to {}", sweep.rows.len(), dir.display());
                    Ok(())
                }
                None => emit(None, &sweep.to_csv()),
            }
        }
        Command::Figures { opts, figures } => {
            let r = resolve(&opts)?;
            if opts.print_config {
                print!("{}", r.config.to_config_text());
                return Ok(());
            }
            let ids: Vec<u32> = if figures.is_empty() {
                FIGURES.iter().map(|f| f.id).collect()
            } else {
                figures
            };
            for &id in &ids {
                harness::figure_spec(id)?;
            }
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let sweep = run_sweep(&r.spec, &r.config, r.config.seed)?;
            for id in ids {
                let path = emit_figure_data(&sweep, id, &dir)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Replay {
            trace,
            queue_variant,
            receiver_delay,
            uqa_overhead,
            duration,
            out,
        } => {
            let mode: QueueMode = queue_variant
                .parse()
                .map_err(|e| uqa_core::ConfigError::new("queue_variant", e))?;
            if !(receiver_delay.is_finite() && receiver_delay >= 0.0) {
                return Err(uqa_core::ConfigError::new("receiver_delay", "must be >= 0").into());
            }
            let records = parse_trace(&read(&trace)?)?;
            let until = duration.unwrap_or_else(|| {
                let last = records.iter().map(|r| r.t_send).fold(0.0, f64::max);
                last + records.len() as f64 * (receiver_delay + uqa_overhead) + 1.0
            });
            let (rx, report) = replay(&records, mode, receiver_delay, uqa_overhead, until);
            let remaining: Vec<TraceRecord> = rx
                .queue()
                .iter()
                .map(|m| TraceRecord::new(m.t_created, m.clone()))
                .collect();
            let mut text = format!("# final queue ({} messages)\n", remaining.len());
            text.push_str(&write_trace(&remaining));
            text.push_str("# metrics\n");
            let fields = [
                ("messages_sent", report.messages_sent.to_string()),
                ("messages_delivered", report.messages_delivered.to_string()),
                ("messages_replaced", report.messages_replaced.to_string()),
                ("final_queue_len", report.final_queue_len.to_string()),
                ("avg_queue_len", csv::fmt_g6(report.avg_queue_len)),
                ("peak_queue_len", csv::fmt_g6(report.peak_queue_len)),
                (
                    "avg_time_in_queue_s",
                    csv::fmt_g6(report.avg_time_in_queue_s),
                ),
                ("littles_residual", csv::fmt_g6(report.littles_residual)),
                ("run_duration_s", csv::fmt_g6(report.run_duration_s)),
            ];
            for (k, v) in fields {
                text.push_str(&format!("{k}={v}\n"));
            }
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
