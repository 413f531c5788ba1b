//! CSV rendering. Floats use six significant digits (`%g` style), dot
//! decimal separator, LF line endings.

use super::{AggregateRow, ExperimentConfig};
use crate::metrics::MetricsReport;

pub const RESULT_HEADER: &str = "protocol,topology,packet_size_bytes,receiver_delay_s,seed,messages_sent,messages_delivered,messages_replaced,messages_lost,acks_generated,avg_client_throughput_bps,avg_server_throughput_bps,avg_queue_len,peak_queue_len,avg_time_in_queue_s,littles_residual";

pub const DESTINATION_HEADER: &str = "protocol,topology,packet_size_bytes,receiver_delay_s,seed,destination,messages_sent,messages_delivered,messages_replaced,messages_lost,acks_generated,avg_client_throughput_bps,avg_server_throughput_bps,avg_queue_len,peak_queue_len,avg_time_in_queue_s,littles_residual";

pub const AGGREGATE_HEADER: &str = "protocol,topology,receiver_delay_s,cells,messages_sent,messages_delivered,messages_replaced,messages_lost,acks_generated,avg_client_throughput_bps,avg_server_throughput_bps,avg_queue_len,peak_queue_len,avg_time_in_queue_s,littles_residual";

/// Formats like C's `%g`: six significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn metric_fields(r: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.messages_sent,
        r.messages_delivered,
        r.messages_replaced,
        r.messages_lost,
        r.acks_generated,
        fmt_g6(r.avg_client_throughput_bps),
        fmt_g6(r.avg_server_throughput_bps),
        fmt_g6(r.avg_queue_len),
        fmt_g6(r.peak_queue_len),
        fmt_g6(r.avg_time_in_queue_s),
        fmt_g6(r.littles_residual),
    )
}

fn cell_fields(c: &ExperimentConfig) -> String {
    format!(
        "{},{},{},{},{}",
        c.protocol,
        c.topology,
        c.packet_size_bytes,
        fmt_g6(c.receiver_delay_s),
        c.seed
    )
}

pub fn result_row(config: &ExperimentConfig, report: &MetricsReport) -> String {
    format!("{},{}", cell_fields(config), metric_fields(report))
}

pub fn destination_row(config: &ExperimentConfig, dest: usize, report: &MetricsReport) -> String {
    format!("{},{},{}", cell_fields(config), dest, metric_fields(report))
}

pub fn aggregate_row(row: &AggregateRow) -> String {
    let m = &row.means;
    let cols = [
        m.messages_sent,
        m.messages_delivered,
        m.messages_replaced,
        m.messages_lost,
        m.acks_generated,
        m.avg_client_throughput_bps,
        m.avg_server_throughput_bps,
        m.avg_queue_len,
        m.peak_queue_len,
        m.avg_time_in_queue_s,
        m.littles_residual,
    ];
    let mut s = format!(
        "{},{},{},{}",
        row.protocol,
        row.topology,
        fmt_g6(row.receiver_delay_s),
        row.cells
    );
    for c in cols {
        s.push(',');
        s.push_str(&fmt_g6(c));
    }
    s
}

/// Joins a header and rows with LF endings, including a trailing newline.
pub fn document<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.033, "0.033"),
            (0.1, "0.1"),
            (4096.0, "4096"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (999999.5, "1e+06"),
            (0.000123456789, "0.000123457"),
            (0.0000123, "1.23e-05"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.333333"),
            (99.99995, "99.9999"),
            (99.999951, "100"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_g6(v), want, "{v}");
        }
    }

    #[test]
    fn header_has_sixteen_columns() {
        assert_eq!(RESULT_HEADER.split(',').count(), 16);
    }
}
