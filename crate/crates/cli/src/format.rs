//! The on-disk table formats: event streams, per-type results, run
//! statistics, and sweep summaries.
//!
//! Every renderer is a pure string builder and every parser a pure string
//! reader, so the formats round-trip bit-exactly and are easy to golden-
//! test. Files are UTF-8, comma-separated with no padding or quoting,
//! terminated by a trailing newline, and use `\n` line endings only.
//! Floats are rendered with Rust's plain `Display`, which never produces
//! exponent notation and always round-trips exactly.

use ddca_core::{
    AntigenEvent, AntigenTypeReport, Classification, Event, EventStream, SignalInstance,
    StreamMeta,
};
use thiserror::Error;

/// Header of the event-stream format.
pub const STREAM_HEADER: &str = "time,kind,antigen_type,danger,safe";
/// Header of the per-type results format.
pub const RESULTS_HEADER: &str = "antigen_type,presented,mature,mcav,k_alpha,mcav_class,k_class";
/// Header of the run-statistics format.
pub const RUN_STATS_HEADER: &str =
    "num_cells,lifespan_limit,i_s,i_bar,mean_incarnations,t_k,mcav_threshold,wall_time_ms";

/// Stream-format violations. Line numbers are 1-based and count the
/// header as line 1.
#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line 1: expected header {STREAM_HEADER:?}, found {found:?}")]
    Header { found: String },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: timestamp {time} decreases below preceding {prev}")]
    DecreasingTime { line: usize, prev: f64, time: f64 },
}

fn malformed(line: usize, detail: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        detail: detail.into(),
    }
}

/// A parsed stream plus the number of signal fields that had to be
/// clamped into the normalization range.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedStream {
    pub stream: EventStream,
    pub clamp_warnings: u64,
}

fn parse_float(line: usize, field: &str, value: &str) -> Result<f64, FormatError> {
    let parsed: f64 = value
        .parse()
        .map_err(|_| malformed(line, format!("{field} field {value:?} is not a number")))?;
    if !parsed.is_finite() {
        return Err(malformed(
            line,
            format!("{field} field {value:?} must be finite"),
        ));
    }
    Ok(parsed)
}

/// Parse the stream format. Empty input (or a lone header) is an empty
/// stream. Raw signal values outside `[0, max]` are clamped, one counted
/// warning per field; equal-timestamp runs are re-ordered into canonical
/// form (antigens first), while a strictly decreasing timestamp is an
/// error.
pub fn parse_stream(text: &str) -> Result<ParsedStream, FormatError> {
    let meta = StreamMeta::default();
    let max = meta.normalization_max;
    let mut lines = text.split('\n').enumerate();
    let mut events: Vec<Event> = Vec::new();
    let mut clamp_warnings: u64 = 0;

    match lines.next() {
        None => unreachable!("split always yields at least one item"),
        Some((_, "")) if text.len() <= 1 => {
            // Zero-byte input, or a single bare newline.
            return Ok(ParsedStream {
                stream: EventStream::new(events, meta),
                clamp_warnings,
            });
        }
        Some((_, header)) => {
            if header != STREAM_HEADER {
                return Err(FormatError::Header {
                    found: header.to_string(),
                });
            }
        }
    }

    let segment_count = text.split('\n').count();
    let mut prev_time: Option<f64> = None;
    for (index, raw) in lines {
        let line = index + 1;
        if raw.is_empty() {
            // Acceptable only as the position after a trailing newline.
            if line == segment_count {
                break;
            }
            return Err(malformed(line, "empty line"));
        }
        if raw.contains('\r') {
            return Err(malformed(line, "carriage return not allowed (\\n line endings only)"));
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(malformed(
                line,
                format!("expected 5 comma-separated fields, found {}", fields.len()),
            ));
        }
        let time = parse_float(line, "time", fields[0])?;
        if time < 0.0 {
            return Err(malformed(line, format!("time {time} is negative")));
        }
        if let Some(prev) = prev_time {
            if time < prev {
                return Err(FormatError::DecreasingTime { line, prev, time });
            }
        }
        prev_time = Some(time);

        match fields[1] {
            "antigen" => {
                if fields[2].is_empty() {
                    return Err(malformed(line, "antigen row has empty antigen_type"));
                }
                if !fields[3].is_empty() || !fields[4].is_empty() {
                    return Err(malformed(
                        line,
                        "antigen row must leave danger and safe empty",
                    ));
                }
                events.push(Event::Antigen(AntigenEvent {
                    time,
                    antigen_type: fields[2].to_string(),
                }));
            }
            "signal" => {
                if !fields[2].is_empty() {
                    return Err(malformed(line, "signal row must leave antigen_type empty"));
                }
                let mut clamp = |value: f64| {
                    if value < 0.0 {
                        clamp_warnings += 1;
                        0.0
                    } else if value > max {
                        clamp_warnings += 1;
                        max
                    } else {
                        value
                    }
                };
                let danger = clamp(parse_float(line, "danger", fields[3])?);
                let safe = clamp(parse_float(line, "safe", fields[4])?);
                events.push(Event::Signal(SignalInstance { time, danger, safe }));
            }
            other => {
                return Err(malformed(line, format!("unknown event kind {other:?}")));
            }
        }
    }

    Ok(ParsedStream {
        stream: EventStream::new(events, meta),
        clamp_warnings,
    })
}

/// Render a stream to the file format (header, one row per event,
/// trailing newline).
pub fn render_stream(stream: &EventStream) -> String {
    let mut out = String::with_capacity(32 * (stream.events.len() + 1));
    out.push_str(STREAM_HEADER);
    out.push('\n');
    for event in &stream.events {
        match event {
            Event::Antigen(a) => {
                out.push_str(&format!("{},antigen,{},,\n", a.time, a.antigen_type));
            }
            Event::Signal(s) => {
                out.push_str(&format!("{},signal,,{},{}\n", s.time, s.danger, s.safe));
            }
        }
    }
    out
}

fn opt_float(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "NA".to_string(),
    }
}

fn opt_class(value: Option<Classification>) -> String {
    match value {
        Some(c) => format!("{c}"),
        None => "NA".to_string(),
    }
}

/// Render per-type reports to the results format. Absent scores and
/// classifications render as `NA`.
pub fn render_results(reports: &[AntigenTypeReport]) -> String {
    let mut out = String::new();
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.antigen_type,
            r.presented_total,
            r.mature_count,
            opt_float(r.mcav),
            opt_float(r.k_alpha),
            opt_class(r.mcav_class),
            opt_class(r.k_class),
        ));
    }
    out
}

/// One run's statistics row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatsRow {
    pub num_cells: usize,
    pub lifespan_limit: f64,
    pub i_s: u64,
    pub i_bar: Option<f64>,
    pub mean_incarnations: Option<f64>,
    pub t_k: Option<f64>,
    pub mcav_threshold: Option<f64>,
    pub wall_time_ms: f64,
}

/// Render the single-row run-statistics file.
pub fn render_run_stats(row: &RunStatsRow) -> String {
    format!(
        "{RUN_STATS_HEADER}\n{},{},{},{},{},{},{},{}\n",
        row.num_cells,
        row.lifespan_limit,
        row.i_s,
        opt_float(row.i_bar),
        opt_float(row.mean_incarnations),
        opt_float(row.t_k),
        opt_float(row.mcav_threshold),
        row.wall_time_ms,
    )
}

/// Render a sweep's summary table: one row per swept value, per-type MCAV
/// and K columns over the union of antigen types seen across rows, then
/// thresholds, behavior statistics, and wall time. Rows whose run failed
/// render every metric as `NA`.
pub fn render_sweep_summary(result: &crate::experiments::SweepResult) -> String {
    use std::collections::BTreeSet;

    let mut types: BTreeSet<&str> = BTreeSet::new();
    for row in &result.rows {
        if let Ok(data) = &row.outcome {
            for report in &data.analysis.reports {
                types.insert(&report.antigen_type);
            }
        }
    }

    let mut out = String::new();
    out.push_str(result.swept_name);
    for t in &types {
        out.push_str(&format!(",mcav_{t}"));
    }
    for t in &types {
        out.push_str(&format!(",k_alpha_{t}"));
    }
    out.push_str(",t_k,mcav_threshold,mean_iterations,mean_incarnations,wall_time_ms\n");

    for row in &result.rows {
        out.push_str(&row.swept.to_string());
        match &row.outcome {
            Ok(data) => {
                let report_for = |t: &str| {
                    data.analysis
                        .reports
                        .iter()
                        .find(|r| r.antigen_type == t)
                };
                for t in &types {
                    out.push(',');
                    out.push_str(&opt_float(report_for(t).and_then(|r| r.mcav)));
                }
                for t in &types {
                    out.push(',');
                    out.push_str(&opt_float(report_for(t).and_then(|r| r.k_alpha)));
                }
                out.push_str(&format!(
                    ",{},{},{},{},{}\n",
                    opt_float(data.analysis.thresholds.t_k),
                    opt_float(data.analysis.thresholds.mcav_threshold),
                    opt_float(data.analysis.stats.mean_iterations),
                    opt_float(data.analysis.stats.mean_incarnations),
                    data.wall_time_ms,
                ));
            }
            Err(_) => {
                for _ in 0..(2 * types.len() + 5) {
                    out.push_str(",NA");
                }
                out.push('\n');
            }
        }
    }
    out
}
