//! Per-antigen-type anomaly scores, run-derived thresholds, and
//! classification.
//!
//! Two scores are computed per antigen type from the presentation log:
//!
//! - **MCAV** — the fraction of the type's presented antigens carried by
//!   *mature* cells (accumulated context `k > 0`; a cell presenting with
//!   `k = 0` counts as semi-mature). Always in `[0, 1]`, but insensitive to
//!   how strongly positive or negative the context was.
//! - **K-alpha** — a real-valued score that keeps the context magnitudes:
//!   the summed `k` of the presenting cells over the summed count of the
//!   type's presented antigens (signal units per antigen).
//!
//! Classification thresholds are derived from the run itself rather than
//! configured: the K-alpha threshold `t_k = (s_k / i_s) * i_bar` scales the
//! stream's per-instance mean context (`s_k` = total danger minus twice
//! total safe, over `i_s` instances) by the run's observed mean iterations
//! per presentation; the MCAV threshold is the stream's total danger to
//! total safe ratio. Scores strictly above their threshold classify as
//! anomalous; equality classifies as normal.
//!
//! Types that were never presented keep *absent* scores — explicitly
//! distinguished from 0, and excluded from classification.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{PresentationRecord, RunLog, SignalInstance};

// ===== Scores =====

/// Which reading of the K-alpha numerator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KAlphaMode {
    /// Each presenting cell contributes its full `k_value` once,
    /// regardless of how many antigens of the type it carried. Default.
    #[default]
    Literal,
    /// Each presenting cell contributes `k_value * count`, weighting its
    /// context by how much of the type it carried.
    Weighted,
}

/// Count of antigens of `antigen_type` in one record's profile.
fn type_count(record: &PresentationRecord, antigen_type: &str) -> u64 {
    record.profile.get(antigen_type).copied().unwrap_or(0)
}

/// MCAV for one antigen type over a set of presentation records: mature
/// count over presented count, where an antigen is mature when its
/// presenting cell's `k_value` is strictly positive.
///
/// Returns `None` when the type was never presented (absent, not 0).
pub fn mcav(records: &[PresentationRecord], antigen_type: &str) -> Option<f64> {
    let mut presented: u64 = 0;
    let mut mature: u64 = 0;
    for record in records {
        let count = type_count(record, antigen_type);
        presented += count;
        if record.k_value > 0.0 {
            mature += count;
        }
    }
    if presented == 0 {
        None
    } else {
        Some(mature as f64 / presented as f64)
    }
}

/// K-alpha for one antigen type over a set of presentation records: summed
/// context of the presenting cells over the type's summed presented count.
///
/// Returns `None` when the type was never presented. Empty-profile records
/// never contribute (they present no antigen of any type).
pub fn k_alpha(records: &[PresentationRecord], antigen_type: &str, mode: KAlphaMode) -> Option<f64> {
    let mut numerator = 0.0;
    let mut denominator: u64 = 0;
    for record in records {
        let count = type_count(record, antigen_type);
        if count == 0 {
            continue;
        }
        numerator += match mode {
            KAlphaMode::Literal => record.k_value,
            KAlphaMode::Weighted => record.k_value * count as f64,
        };
        denominator += count;
    }
    if denominator == 0 {
        None
    } else {
        Some(numerator / denominator as f64)
    }
}

// ===== Thresholds =====

/// Threshold-derivation failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    /// The stream carried no signal instances; the K-alpha threshold is
    /// undefined.
    NoSignalInstances,
    /// The stream's total safe signal is zero; the MCAV threshold ratio is
    /// undefined (a caller may substitute a manual threshold).
    ZeroSafeTotal,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::NoSignalInstances => {
                write!(f, "no signal instances: K-alpha threshold undefined")
            }
            MetricsError::ZeroSafeTotal => {
                write!(f, "total safe signal is zero: MCAV threshold undefined")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

fn signal_totals(signals: &[SignalInstance]) -> (f64, f64, u64) {
    let mut sum_danger = 0.0;
    let mut sum_safe = 0.0;
    let mut count: u64 = 0;
    for s in signals {
        sum_danger += s.danger;
        sum_safe += s.safe;
        count += 1;
    }
    (sum_danger, sum_safe, count)
}

/// The K-alpha classification threshold for a stream:
/// `t_k = (s_k / i_s) * i_bar`, where `s_k` is the stream's total danger
/// minus twice its total safe, `i_s` the signal-instance count, and
/// `i_bar` the run's observed mean iterations per presentation.
///
/// Errors when the stream has no signal instances.
pub fn t_k_threshold(signals: &[SignalInstance], i_bar: f64) -> Result<f64, MetricsError> {
    let (sum_danger, sum_safe, count) = signal_totals(signals);
    if count == 0 {
        return Err(MetricsError::NoSignalInstances);
    }
    let s_k = sum_danger - 2.0 * sum_safe;
    Ok(s_k / count as f64 * i_bar)
}

/// The MCAV classification threshold for a stream: total danger over total
/// safe. Errors when total safe is zero.
pub fn mcav_threshold(signals: &[SignalInstance]) -> Result<f64, MetricsError> {
    let (sum_danger, sum_safe, _) = signal_totals(signals);
    if sum_safe > 0.0 {
        Ok(sum_danger / sum_safe)
    } else {
        Err(MetricsError::ZeroSafeTotal)
    }
}

/// All run-derived threshold quantities for one stream + run pairing.
///
/// `t_k` is present only when the stream had signal instances *and* the
/// run produced presentations (so `i_bar` exists); `mcav_threshold` only
/// when total safe is positive. Absent thresholds leave the corresponding
/// classifications absent rather than failing the analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    /// Total danger minus twice total safe over the whole stream.
    pub s_k: f64,
    /// Signal-instance count.
    pub i_s: u64,
    /// Mean iterations per presentation from the same run, if any.
    pub i_bar: Option<f64>,
    /// K-alpha threshold `(s_k / i_s) * i_bar`, if defined.
    pub t_k: Option<f64>,
    /// MCAV threshold (total danger / total safe), if defined.
    pub mcav_threshold: Option<f64>,
}

/// Derive every threshold quantity, tolerating the degenerate cases: any
/// undefined threshold is simply absent.
pub fn derive_thresholds(signals: &[SignalInstance], i_bar: Option<f64>) -> ThresholdSet {
    let (sum_danger, sum_safe, count) = signal_totals(signals);
    let s_k = sum_danger - 2.0 * sum_safe;
    let t_k = match (count, i_bar) {
        (0, _) | (_, None) => None,
        (_, Some(ib)) => Some(s_k / count as f64 * ib),
    };
    let mcav_threshold = if sum_safe > 0.0 {
        Some(sum_danger / sum_safe)
    } else {
        None
    };
    ThresholdSet {
        s_k,
        i_s: count,
        i_bar,
        t_k,
        mcav_threshold,
    }
}

// ===== Classification =====

/// Binary per-metric verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Anomalous,
    Normal,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Anomalous => write!(f, "anomalous"),
            Classification::Normal => write!(f, "normal"),
        }
    }
}

/// Strictly-above-threshold classification: `score > threshold` is
/// anomalous; equality (and below) is normal.
pub fn classify(score: f64, threshold: f64) -> Classification {
    if score > threshold {
        Classification::Anomalous
    } else {
        Classification::Normal
    }
}

// ===== Reports =====

/// Per-antigen-type aggregate for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct AntigenTypeReport {
    pub antigen_type: String,
    /// Total presented antigens of this type across all records.
    pub presented_total: u64,
    /// Presented antigens of this type carried by mature (`k > 0`) cells.
    pub mature_count: u64,
    /// MCAV score; absent when never presented.
    pub mcav: Option<f64>,
    /// K-alpha score; absent when never presented.
    pub k_alpha: Option<f64>,
    /// Verdict under MCAV; absent when the score or threshold is absent.
    pub mcav_class: Option<Classification>,
    /// Verdict under K-alpha; absent when the score or threshold is absent.
    pub k_class: Option<Classification>,
}

/// Build one report per antigen type seen anywhere in the run (presented
/// or stranded), sorted by type label.
pub fn build_reports(
    log: &RunLog,
    thresholds: &ThresholdSet,
    mode: KAlphaMode,
) -> Vec<AntigenTypeReport> {
    let mut types: BTreeSet<&str> = BTreeSet::new();
    for record in &log.records {
        types.extend(record.profile.keys().map(String::as_str));
    }
    types.extend(log.unpresented_profile.keys().map(String::as_str));

    types
        .into_iter()
        .map(|ty| {
            let mut presented_total: u64 = 0;
            let mut mature_count: u64 = 0;
            for record in &log.records {
                let count = type_count(record, ty);
                presented_total += count;
                if record.k_value > 0.0 {
                    mature_count += count;
                }
            }
            let mcav = mcav(&log.records, ty);
            let k_alpha = k_alpha(&log.records, ty, mode);
            let mcav_class = match (mcav, thresholds.mcav_threshold) {
                (Some(score), Some(threshold)) => Some(classify(score, threshold)),
                _ => None,
            };
            let k_class = match (k_alpha, thresholds.t_k) {
                (Some(score), Some(threshold)) => Some(classify(score, threshold)),
                _ => None,
            };
            AntigenTypeReport {
                antigen_type: String::from(ty),
                presented_total,
                mature_count,
                mcav,
                k_alpha,
                mcav_class,
                k_class,
            }
        })
        .collect()
}

// ===== Tests =====
