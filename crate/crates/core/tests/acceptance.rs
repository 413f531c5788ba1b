//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion's state differs from what is recorded in
//! `KNOWN_RED`.

mod common;

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{drive, exhaustive_check, msg, random_ops, Op};
use uqa_core::harness::{
    emit_figure_data, run_experiment, run_sweep, AggregateMeans, AggregateRow, ExperimentConfig,
    SweepResult, SweepSpec, FIGURES,
};
use uqa_core::traffic::Schedule;
use uqa_core::{
    MessageKind, QueueMode, TrafficConfig, TrafficGenerator, TransportKind, UpdatableQueue,
};

/// Criteria currently red with the default model parameters.
const KNOWN_RED: &[u32] = &[5];

const SWEEP_SEED: u64 = 7;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn adjacency() -> Verdict {
    let (violations, took) = timed(|| {
        let mut bad = 0;
        for seed in 0..10 {
            let ops = random_ops(seed, 10_000, 4, 0.3);
            drive(QueueMode::TailOnly, &ops, |q| {
                if !q.adjacency_holds() {
                    bad += 1;
                }
            });
        }
        bad
    });
    verdict(
        violations == 0 && took < Duration::from_secs(5),
        format!(
            "10 seeds x 10000 ops, 4 senders, {violations} violating states, {took:.2?} (limit 5s)"
        ),
    )
}

fn oracle() -> Verdict {
    let alphabet = [
        (0, MessageKind::Status),
        (1, MessageKind::Status),
        (0, MessageKind::Command),
        (1, MessageKind::Command),
    ];
    let (result, took) = timed(|| exhaustive_check(&alphabet, 12));
    match result {
        Ok(n) => verdict(
            took < Duration::from_secs(60),
            format!("{n} traces of length 1..=12 match, {took:.2?} (limit 60s)"),
        ),
        Err(trace) => verdict(false, format!("mismatch on {trace:?}")),
    }
}

fn dominance() -> Verdict {
    let mut failures = 0;
    for seed in 0..100 {
        let ops = random_ops(1000 + seed, 2_000, 3, 0.3);
        let mut fifo = UpdatableQueue::new();
        let mut uqa = UpdatableQueue::new();
        let (mut sum_f, mut sum_u, mut peak_f, mut peak_u) = (0usize, 0usize, 0usize, 0usize);
        let mut ok = true;
        for (i, op) in ops.iter().enumerate() {
            let t = i as f64;
            match *op {
                Op::Enqueue(s, k) => {
                    fifo.enqueue_fifo(msg(s, i as u64, k), t);
                    uqa.enqueue_uqa(msg(s, i as u64, k), t);
                }
                Op::Dequeue => {
                    fifo.dequeue(t);
                    uqa.dequeue(t);
                }
            }
            ok &= uqa.len() <= fifo.len();
            sum_f += fifo.len();
            sum_u += uqa.len();
            peak_f = peak_f.max(fifo.len());
            peak_u = peak_u.max(uqa.len());
        }
        if !(ok && sum_u <= sum_f && peak_u <= peak_f) {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("100 paired runs, {failures} with UQA above FIFO"),
    )
}

fn conservation(sweep: &SweepResult) -> Verdict {
    let mut bad = Vec::new();
    for row in &sweep.rows {
        for r in std::iter::once(&row.report).chain(&row.per_destination) {
            let balance =
                r.messages_delivered + r.messages_replaced + r.messages_lost + r.final_queue_len;
            if r.messages_sent != balance || r.messages_in_transit != 0 {
                bad.push(row.config.cell_label());
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} cells, {} reports unbalanced {:?}",
            sweep.rows.len(),
            bad.len(),
            bad.first()
        ),
    )
}

fn metric_of(
    agg: &[AggregateRow],
    one_to_many: bool,
    delay: f64,
    f: fn(&AggregateMeans) -> f64,
) -> [f64; 4] {
    TransportKind::ALL.map(|p| {
        let row = agg
            .iter()
            .find(|r| {
                r.protocol == p
                    && r.topology.is_one_to_many() == one_to_many
                    && r.receiver_delay_s == delay
            })
            .expect("aggregate row");
        f(&row.means)
    })
}

// indices into TransportKind::ALL
const TCP: usize = 0;
const UDP: usize = 1;
const TCP_UQA: usize = 2;
const UDP_UQA: usize = 3;

fn is_strict_max(v: &[f64; 4], i: usize) -> bool {
    (0..4).all(|j| j == i || v[i] > v[j])
}

fn is_strict_min(v: &[f64; 4], i: usize) -> bool {
    (0..4).all(|j| j == i || v[i] < v[j])
}

fn fmt4(v: &[f64; 4]) -> String {
    TransportKind::ALL
        .iter()
        .zip(v)
        .map(|(p, x)| format!("{p}={x:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn one_to_one_ranks(sweep: &SweepResult, took: Duration) -> (Verdict, Vec<String>) {
    let agg = sweep.aggregate();
    let mut notes = Vec::new();
    let (mut a, mut b, mut c) = (true, true, true);
    for delay in [0.033, 0.05, 0.1] {
        let q = metric_of(&agg, false, delay, |m| m.avg_queue_len);
        let ct = metric_of(&agg, false, delay, |m| m.avg_client_throughput_bps);
        let st = metric_of(&agg, false, delay, |m| m.avg_server_throughput_bps);
        let qa = is_strict_max(&q, UDP) && is_strict_min(&q, TCP_UQA);
        let udp_low = ct[UDP].min(ct[UDP_UQA]);
        let qb = udp_low > ct[TCP].max(ct[TCP_UQA]) && is_strict_min(&ct, TCP_UQA);
        let sudp_low = st[UDP].min(st[UDP_UQA]);
        let qc = is_strict_min(&st, TCP) && sudp_low > st[TCP].max(st[TCP_UQA]);
        a &= qa;
        b &= qb;
        c &= qc;
        notes.push(format!("delay {delay}: queue {} [{}]", fmt4(&q), ok(qa)));
        notes.push(format!("delay {delay}: client {} [{}]", fmt4(&ct), ok(qb)));
        notes.push(format!("delay {delay}: server {} [{}]", fmt4(&st), ok(qc)));
    }
    let fast = took < Duration::from_secs(120);
    (
        verdict(
            a && b && c && fast,
            format!(
                "(a) queue {} (b) client {} (c) server {}; sweep {took:.2?} (limit 120s)",
                ok(a),
                ok(b),
                ok(c)
            ),
        ),
        notes,
    )
}

fn one_to_many_ranks(sweep: &SweepResult) -> (Verdict, Vec<String>) {
    let agg = sweep.aggregate();
    let mut notes = Vec::new();
    let mut all = true;
    for delay in [0.033, 0.05, 0.1] {
        let q = metric_of(&agg, true, delay, |m| m.avg_queue_len);
        let good = is_strict_min(&q, TCP_UQA) && is_strict_max(&q, UDP) && q[UDP_UQA] < q[UDP];
        all &= good;
        notes.push(format!("delay {delay}: queue {} [{}]", fmt4(&q), ok(good)));
    }
    (
        verdict(
            all,
            "TCP-UQA lowest, UDP highest, UDP-UQA below UDP at every delay",
        ),
        notes,
    )
}

fn traffic_mix() -> Verdict {
    let n = 10_000u32;
    let tol = 4.0 * (0.21 / f64::from(n)).sqrt();
    let mut worst: f64 = 0.0;
    let mut all = true;
    for seed in 0..20 {
        let mut g = TrafficGenerator::new(TrafficConfig {
            seed,
            ..TrafficConfig::default()
        });
        let statuses = (0..n)
            .filter(|_| g.next_kind() == MessageKind::Status)
            .count();
        let frac = statuses as f64 / f64::from(n);
        worst = worst.max((frac - 0.7).abs());
        all &= (frac - 0.7).abs() <= tol;
    }
    verdict(
        all,
        format!("20 seeds, max |p - 0.70| = {worst:.4} (tolerance {tol:.4})"),
    )
}

fn littles_law() -> Verdict {
    let cfg = ExperimentConfig {
        protocol: TransportKind::Udp,
        messages_per_destination: 20_000,
        packet_size_bytes: 32,
        receiver_delay_s: 0.004,
        schedule: Schedule::Poisson,
        seed: 99,
        ..ExperimentConfig::default()
    };
    let r = run_experiment(&cfg).expect("poisson run").report;
    let rho = 0.004 * r.messages_sent as f64 / (cfg.duration_s() * cfg.send_fraction);
    verdict(
        r.littles_residual <= 0.05 && r.messages_delivered >= 10_000,
        format!(
            "{} messages, load {rho:.2}, L = {:.5}, residual {:.5} (limit 0.05)",
            r.messages_delivered, r.avg_queue_len, r.littles_residual
        ),
    )
}

fn determinism() -> Verdict {
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_uqa"));
        cmd.args(["sweep", "--seed", &SWEEP_SEED.to_string()]);
        if let Some(t) = threads {
            cmd.env("RAYON_NUM_THREADS", t);
        }
        let out = cmd.output().expect("spawn uqa");
        assert!(out.status.success());
        out.stdout
    };
    let a = run(None);
    let b = run(None);
    let c = run(Some("1"));
    verdict(
        a == b && a == c && !a.is_empty(),
        format!(
            "{} bytes; two parallel runs equal: {}; serial run equal: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn shape(sweep: &SweepResult) -> Verdict {
    let rows = sweep.to_csv().lines().count() - 1;
    let agg = sweep.aggregate_csv().lines().count() - 1;
    let dir = tempfile::tempdir().expect("tempdir");
    let mut figs_ok = 0;
    for f in FIGURES {
        let path = emit_figure_data(sweep, f.id, dir.path()).expect("figure");
        let text = fs::read_to_string(path).expect("read figure");
        let lines: Vec<&str> = text.lines().collect();
        let good = lines.len() == 5
            && lines[0] == "receiver_delay_s,TCP,UDP,TCP-UQA,UDP-UQA"
            && lines
                .iter()
                .all(|l| l.split(',').count() == 5 && !l.contains(",,") && !l.ends_with(','));
        figs_ok += usize::from(good);
    }
    let files = fs::read_dir(dir.path()).expect("read dir").count();
    verdict(
        rows == 96 && agg == 32 && figs_ok == 8 && files == 8,
        format!("{rows} rows, {agg} aggregate rows, {figs_ok}/8 figure tables of 4 delays x 4 protocols"),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let (sweep, took) = timed(|| {
        run_sweep(
            &SweepSpec::default(),
            &ExperimentConfig::default(),
            SWEEP_SEED,
        )
        .expect("default sweep")
    });
    let (c5, notes5) = one_to_one_ranks(&sweep, took);
    let (c6, notes6) = one_to_many_ranks(&sweep);
    let results: Vec<(u32, &str, Verdict, Vec<String>)> = vec![
        (1, "adjacency invariant", adjacency(), vec![]),
        (2, "oracle equivalence", oracle(), vec![]),
        (3, "dominance over FIFO", dominance(), vec![]),
        (4, "conservation", conservation(&sweep), vec![]),
        (5, "one-to-one orderings", c5, notes5),
        (6, "one-to-many orderings", c6, notes6),
        (7, "traffic mix", traffic_mix(), vec![]),
        (8, "Little's law", littles_law(), vec![]),
        (9, "determinism", determinism(), vec![]),
        (10, "sweep shape", shape(&sweep), vec![]),
    ];
    let mut unexpected = Vec::new();
    for (id, name, v, notes) in &results {
        let known = KNOWN_RED.contains(id);
        let tag = match (v.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as known red)",
        };
        println!("criterion {id:>2} {name:<22} {tag}: {}", v.detail);
        for n in notes {
            println!("    {n}");
        }
        if v.pass == known {
            unexpected.push(*id);
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected state for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
