//! One-call composition of the engine and the metrics layer: run a
//! stream, then derive cell statistics, thresholds, and per-type reports
//! from the same run.

use alloc::vec::Vec;

use crate::engine::{
    cell_statistics, run_stream, CellStats, EngineConfig, EngineError, Event, RunLog,
    SignalInstance,
};
use crate::metrics::{build_reports, derive_thresholds, AntigenTypeReport, KAlphaMode, ThresholdSet};

/// Everything derivable from one run of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    pub log: RunLog,
    pub stats: CellStats,
    pub thresholds: ThresholdSet,
    pub reports: Vec<AntigenTypeReport>,
}

/// The signal instances of a stream, in stream order.
pub fn signal_instances(events: &[Event]) -> Vec<SignalInstance> {
    events
        .iter()
        .filter_map(|event| match event {
            Event::Signal(s) => Some(s.clone()),
            Event::Antigen(_) => None,
        })
        .collect()
}

/// Derive statistics, thresholds, and reports for a log produced by
/// running `events` under `config`. Split out from [`analyze`] so callers
/// that time the engine loop can run it separately.
pub fn finish_analysis(
    config: &EngineConfig,
    events: &[Event],
    log: RunLog,
    mode: KAlphaMode,
) -> RunAnalysis {
    let stats = cell_statistics(&log, config);
    let signals = signal_instances(events);
    let thresholds = derive_thresholds(&signals, stats.mean_iterations);
    let reports = build_reports(&log, &thresholds, mode);
    RunAnalysis {
        log,
        stats,
        thresholds,
        reports,
    }
}

/// Run `events` under `config` and derive the full analysis.
pub fn analyze(
    config: &EngineConfig,
    events: &[Event],
    mode: KAlphaMode,
) -> Result<RunAnalysis, EngineError> {
    let log = run_stream(config, events)?;
    Ok(finish_analysis(config, events, log, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, portscan_default, ProcessRole};

    #[test]
    fn signal_instances_keeps_order_and_drops_antigens() {
        let stream = generate_scenario(&portscan_default(1)).unwrap();
        let signals = signal_instances(&stream.events);
        assert_eq!(signals.len(), 38);
        assert!(signals.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn analyze_matches_manual_composition() {
        let stream = generate_scenario(&portscan_default(7)).unwrap();
        let config = EngineConfig::default();
        let direct = analyze(&config, &stream.events, KAlphaMode::Literal).unwrap();
        let log = run_stream(&config, &stream.events).unwrap();
        let composed = finish_analysis(&config, &stream.events, log, KAlphaMode::Literal);
        assert_eq!(direct, composed);
    }

    #[test]
    fn default_scenario_analysis_is_self_consistent() {
        let stream = generate_scenario(&portscan_default(1)).unwrap();
        let config = EngineConfig::default();
        let analysis = analyze(&config, &stream.events, KAlphaMode::Literal).unwrap();

        assert_eq!(analysis.log.signal_counter, 38);
        assert_eq!(analysis.log.antigen_counter, 1052);
        assert_eq!(
            analysis.log.presented_total() + analysis.log.unpresented_total(),
            1052
        );
        assert_eq!(analysis.thresholds.i_s, 38);
        assert!(analysis.thresholds.t_k.is_some());
        assert!(analysis.thresholds.mcav_threshold.is_some());
        let labels: Vec<&str> = analysis
            .reports
            .iter()
            .map(|r| r.antigen_type.as_str())
            .collect();
        assert_eq!(labels, ["bash", "nmap", "pts", "sshd"]);
    }

    #[test]
    fn empty_stream_analysis_is_all_absent() {
        let analysis = analyze(&EngineConfig::default(), &[], KAlphaMode::Literal).unwrap();
        assert_eq!(analysis.stats, CellStats::default());
        assert_eq!(analysis.thresholds.t_k, None);
        assert_eq!(analysis.thresholds.mcav_threshold, None);
        assert!(analysis.reports.is_empty());
    }

    #[test]
    fn full_window_scan_makes_every_presentation_mature() {
        // Scan window covering the whole session: every signal instance
        // carries positive context, so the anomalous type's MCAV is 1.
        let mut spec = portscan_default(5);
        spec.scan_window = (0.0, spec.duration);
        for p in &mut spec.processes {
            match p.role {
                ProcessRole::Normal => p.rate = 0.0,
                ProcessRole::Anomalous => p.active = (0.0, spec.duration),
            }
        }
        let stream = generate_scenario(&spec).unwrap();
        let config = EngineConfig {
            num_cells: 10,
            lifespan_limit: 100.0,
            flush_at_end: true,
        };
        let analysis = analyze(&config, &stream.events, KAlphaMode::Literal).unwrap();
        for report in &analysis.reports {
            assert!(report.presented_total > 0);
            assert_eq!(report.mature_count, report.presented_total);
            assert_eq!(report.mcav, Some(1.0));
        }
        // With danger dominant everywhere, the derived MCAV threshold
        // saturates far above 1 — a reminder that the ratio threshold only
        // separates types when both phases appear in the session.
        assert!(analysis.thresholds.mcav_threshold.unwrap() > 1.0);
    }
}
