//! The deterministic cell-population event loop.
//!
//! The engine owns a fixed population of [`DendriticCell`]s whose initial
//! lifespans are spread uniformly over `(0, lifespan_limit]`. It ingests an
//! ordered event stream:
//!
//! - **Antigen events** increment a global counter and land in cell
//!   `counter mod N` (counter incremented first, so the first antigen goes
//!   to cell `1 mod N`), bumping that cell's per-type profile count.
//! - **Signal instances** are folded once into a shared [`ProcessedSignal`]
//!   and applied to every cell in index order: lifespan decreases by `csm`,
//!   accumulated context increases by `k`, and the iteration count bumps.
//!   Any cell whose lifespan reaches `<= 0` emits a [`PresentationRecord`]
//!   (after absorbing the triggering instance's full `csm` and `k`) and
//!   resets to its initial state. A freshly reset cell does not re-receive
//!   the instance that triggered its reset.
//!
//! Lifespans are real-valued and compared exactly against zero — no epsilon
//! is involved, so a zero-`csm` instance can never trigger a presentation
//! (it still counts as an iteration: the cell observed the instance).
//!
//! At end of stream, antigen still held by live cells is reported in the
//! run log's `unpresented_profile`; with `flush_at_end` enabled, every live
//! cell holding antigen emits a final record instead.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// ===== Events =====

/// A timestamped occurrence of one antigen — the unit of evidence to be
/// classified, identified by its opaque type label (e.g. a process ID).
///
/// Times are seconds, non-negative and non-decreasing within a stream;
/// `antigen_type` must be non-empty (enforced at the parsing/generation
/// boundary, not re-checked here).
#[derive(Debug, Clone, PartialEq)]
pub struct AntigenEvent {
    pub time: f64,
    pub antigen_type: String,
}

/// A timestamped pair of normalized context measurements.
///
/// `danger` is evidence of anomalous behavior, `safe` evidence of normal
/// behavior; both are dimensionless signal units normalized into `[0, 50]`
/// upstream (the engine assumes in-range inputs and never clamps).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalInstance {
    pub time: f64,
    pub danger: f64,
    pub safe: f64,
}

/// One element of the mixed input stream.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Antigen(AntigenEvent),
    Signal(SignalInstance),
}

impl Event {
    /// The event's timestamp in seconds.
    pub fn time(&self) -> f64 {
        match self {
            Event::Antigen(a) => a.time,
            Event::Signal(s) => s.time,
        }
    }
}

// ===== Signal processing =====

/// The population-shared fold of one signal instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessedSignal {
    /// Costimulation value `safe + danger`: the lifespan cost of the
    /// instance. Non-negative for in-range inputs.
    pub csm: f64,
    /// Context value `danger - 2*safe`: positive values are danger
    /// evidence, negative values safe evidence.
    pub k: f64,
}

/// Fold one signal instance's `(safe, danger)` values into the shared
/// `(csm, k)` pair.
///
/// Computed exactly once per instance and applied to every cell, so the
/// whole population sees identical signal input.
pub fn process_signal(safe: f64, danger: f64) -> ProcessedSignal {
    ProcessedSignal {
        csm: safe + danger,
        k: danger - 2.0 * safe,
    }
}

// ===== Population =====

/// One population member.
///
/// State is reset (lifespan restored, context/profile/iterations cleared)
/// each time the cell presents; `incarnations` counts completed cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct DendriticCell {
    /// Population position, `0..N-1`.
    pub index: usize,
    /// Fixed per-index budget: `lifespan_limit * (index + 1) / N`, so the
    /// population spans `(0, lifespan_limit]` with no zero-lifespan cell.
    pub initial_lifespan: f64,
    /// Remaining budget this incarnation.
    pub lifespan: f64,
    /// Accumulated context this incarnation.
    pub k_sum: f64,
    /// Antigen counts collected this incarnation, keyed by type.
    pub profile: BTreeMap<String, u64>,
    /// Signal instances observed this incarnation.
    pub iterations: u64,
    /// Completed present-and-reset cycles.
    pub incarnations: u64,
}

impl DendriticCell {
    fn fresh(index: usize, initial_lifespan: f64) -> Self {
        DendriticCell {
            index,
            initial_lifespan,
            lifespan: initial_lifespan,
            k_sum: 0.0,
            profile: BTreeMap::new(),
            iterations: 0,
            incarnations: 0,
        }
    }

    /// Restore the cell to its freshly initialized state (incarnation count
    /// excepted — that is the cell's cumulative history).
    fn reset(&mut self) {
        self.lifespan = self.initial_lifespan;
        self.k_sum = 0.0;
        self.profile.clear();
        self.iterations = 0;
    }
}

/// Engine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Population size; must be >= 1. Default 100.
    pub num_cells: usize,
    /// Largest initial lifespan, in signal units; must be > 0. Default 100.
    pub lifespan_limit: f64,
    /// When true, every live cell still holding antigen at end of stream
    /// emits a final presentation record (so no antigen is stranded).
    /// Default false: stranded antigen is reported in
    /// [`RunLog::unpresented_profile`] instead.
    pub flush_at_end: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            num_cells: 100,
            lifespan_limit: 100.0,
            flush_at_end: false,
        }
    }
}

/// The logged output of one cell incarnation.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationRecord {
    /// Which cell presented.
    pub cell_index: usize,
    /// The cell's accumulated context at presentation (including the
    /// triggering instance's contribution).
    pub k_value: f64,
    /// Antigen counts the cell collected this incarnation. May be empty —
    /// empty-profile records are logged but carry no weight in any metric.
    pub profile: BTreeMap<String, u64>,
    /// Signal instances the cell observed this incarnation.
    pub iterations: u64,
    /// Timestamp of the triggering signal instance (or of the last stream
    /// event, for end-of-stream flush records).
    pub presented_at: f64,
}

impl PresentationRecord {
    /// Total antigen count across all types in this record's profile.
    pub fn total_count(&self) -> u64 {
        self.profile.values().sum()
    }
}

/// Complete, ordered output of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    /// Presentation records in emission order (stream order, then cell
    /// index order within one signal instance).
    pub records: Vec<PresentationRecord>,
    /// Total antigen events ingested.
    pub antigen_counter: u64,
    /// Total signal instances ingested.
    pub signal_counter: u64,
    /// Total presentations (equals `records.len()`).
    pub total_incarnations: u64,
    /// Antigen counts still held by live cells at end of stream. Empty when
    /// the run flushed. Satisfies antigen conservation: presented counts +
    /// unpresented counts = `antigen_counter`.
    pub unpresented_profile: BTreeMap<String, u64>,
}

impl RunLog {
    #[cfg(test)]
    fn empty() -> Self {
        RunLog {
            records: Vec::new(),
            antigen_counter: 0,
            signal_counter: 0,
            total_incarnations: 0,
            unpresented_profile: BTreeMap::new(),
        }
    }

    /// Sum of presented antigen counts across all records.
    pub fn presented_total(&self) -> u64 {
        self.records.iter().map(|r| r.total_count()).sum()
    }

    /// Sum of unpresented antigen counts.
    pub fn unpresented_total(&self) -> u64 {
        self.unpresented_profile.values().sum()
    }
}

// ===== Errors =====

/// Engine construction / stream validation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// `num_cells` was zero.
    ZeroCells,
    /// `lifespan_limit` was not strictly positive.
    NonPositiveLifespanLimit { limit: f64 },
    /// A strictly decreasing timestamp was encountered at stream position
    /// `index` (0-based).
    UnsortedStream {
        index: usize,
        prev_time: f64,
        time: f64,
    },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::ZeroCells => write!(f, "population size must be at least 1"),
            EngineError::NonPositiveLifespanLimit { limit } => {
                write!(f, "lifespan limit must be > 0, got {limit}")
            }
            EngineError::UnsortedStream {
                index,
                prev_time,
                time,
            } => write!(
                f,
                "unsorted stream: event {index} at t={time} follows t={prev_time}"
            ),
        }
    }
}

impl core::error::Error for EngineError {}

// ===== Engine =====

/// The population engine. Strictly sequential within a run; independent
/// instances are fully isolated and may run concurrently.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    cells: Vec<DendriticCell>,
    records: Vec<PresentationRecord>,
    antigen_counter: u64,
    signal_counter: u64,
    total_incarnations: u64,
    last_time: Option<f64>,
}

impl Engine {
    /// Initialize a population of `config.num_cells` cells with lifespans
    /// `lifespan_limit * (i+1) / N` for `i` in `0..N` — e.g. `{1, 2, ...,
    /// 100}` at the default configuration, `{25, 50, 75, 100}` for four
    /// cells at limit 100.
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        if config.num_cells == 0 {
            return Err(EngineError::ZeroCells);
        }
        if !(config.lifespan_limit > 0.0) {
            return Err(EngineError::NonPositiveLifespanLimit {
                limit: config.lifespan_limit,
            });
        }
        let n = config.num_cells;
        let cells = (0..n)
            .map(|i| {
                let initial = config.lifespan_limit * ((i + 1) as f64) / (n as f64);
                DendriticCell::fresh(i, initial)
            })
            .collect();
        Ok(Engine {
            config,
            cells,
            records: Vec::new(),
            antigen_counter: 0,
            signal_counter: 0,
            total_incarnations: 0,
            last_time: None,
        })
    }

    /// The engine's configuration.
    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Read-only view of the population (current incarnation state).
    pub fn cells(&self) -> &[DendriticCell] {
        &self.cells
    }

    /// Records emitted so far.
    pub fn records(&self) -> &[PresentationRecord] {
        &self.records
    }

    /// Ingest one antigen event: counter increments first, then the event
    /// lands in cell `counter mod N`.
    pub fn ingest_antigen(&mut self, event: &AntigenEvent) {
        self.antigen_counter += 1;
        let index = (self.antigen_counter % self.config.num_cells as u64) as usize;
        *self.cells[index]
            .profile
            .entry(event.antigen_type.clone())
            .or_insert(0) += 1;
        self.last_time = Some(event.time);
    }

    /// Ingest one signal instance: fold it once, apply the fold to every
    /// cell in index order, emit-and-reset any cell whose lifespan reaches
    /// `<= 0`.
    pub fn ingest_signal(&mut self, instance: &SignalInstance) {
        let shared = process_signal(instance.safe, instance.danger);
        for cell in &mut self.cells {
            cell.lifespan -= shared.csm;
            cell.k_sum += shared.k;
            cell.iterations += 1;
            if cell.lifespan <= 0.0 {
                self.records.push(PresentationRecord {
                    cell_index: cell.index,
                    k_value: cell.k_sum,
                    profile: cell.profile.clone(),
                    iterations: cell.iterations,
                    presented_at: instance.time,
                });
                cell.incarnations += 1;
                self.total_incarnations += 1;
                cell.reset();
            }
        }
        self.signal_counter += 1;
        self.last_time = Some(instance.time);
    }

    /// Ingest one event with ordering validation: a timestamp strictly
    /// below the previous event's is rejected (equal timestamps are fine).
    pub fn ingest_event(&mut self, position: usize, event: &Event) -> Result<(), EngineError> {
        let time = event.time();
        if let Some(prev) = self.last_time {
            if time < prev {
                return Err(EngineError::UnsortedStream {
                    index: position,
                    prev_time: prev,
                    time,
                });
            }
        }
        match event {
            Event::Antigen(a) => self.ingest_antigen(a),
            Event::Signal(s) => self.ingest_signal(s),
        }
        Ok(())
    }

    /// End the run: optionally flush, collect stranded antigen, and return
    /// the complete log.
    pub fn finish(mut self) -> RunLog {
        if self.config.flush_at_end {
            let flush_time = self.last_time.unwrap_or(0.0);
            for cell in &mut self.cells {
                if !cell.profile.is_empty() {
                    self.records.push(PresentationRecord {
                        cell_index: cell.index,
                        k_value: cell.k_sum,
                        profile: cell.profile.clone(),
                        iterations: cell.iterations,
                        presented_at: flush_time,
                    });
                    cell.incarnations += 1;
                    self.total_incarnations += 1;
                    cell.reset();
                }
            }
        }
        let mut unpresented = BTreeMap::new();
        for cell in &self.cells {
            for (ty, count) in &cell.profile {
                *unpresented.entry(ty.clone()).or_insert(0) += count;
            }
        }
        RunLog {
            records: self.records,
            antigen_counter: self.antigen_counter,
            signal_counter: self.signal_counter,
            total_incarnations: self.total_incarnations,
            unpresented_profile: unpresented,
        }
    }
}

/// Run a complete time-ordered mixed stream through a fresh engine.
///
/// Rejects invalid configurations and streams with a strictly decreasing
/// timestamp; equal timestamps are accepted in the order given (canonical
/// streams put antigens before signals at equal times).
pub fn run_stream(config: &EngineConfig, events: &[Event]) -> Result<RunLog, EngineError> {
    let mut engine = Engine::new(config.clone())?;
    for (position, event) in events.iter().enumerate() {
        engine.ingest_event(position, event)?;
    }
    Ok(engine.finish())
}

// ===== Run statistics =====

/// Population behavior statistics for one completed run. Both means are
/// absent when the run produced no presentation records.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellStats {
    /// Mean signal instances observed per presentation:
    /// `sum(record.iterations) / record count`.
    pub mean_iterations: Option<f64>,
    /// Mean presentations per cell: `record count / num_cells`.
    pub mean_incarnations: Option<f64>,
}

/// Compute per-run population statistics from a completed log.
pub fn cell_statistics(log: &RunLog, config: &EngineConfig) -> CellStats {
    let count = log.records.len();
    if count == 0 {
        return CellStats {
            mean_iterations: None,
            mean_incarnations: None,
        };
    }
    let total_iterations: u64 = log.records.iter().map(|r| r.iterations).sum();
    CellStats {
        mean_iterations: Some(total_iterations as f64 / count as f64),
        mean_incarnations: Some(count as f64 / config.num_cells as f64),
    }
}

// ===== Tests =====

#[cfg(test)]
mod tests {
    use super::*;

    fn antigen(time: f64, ty: &str) -> Event {
        Event::Antigen(AntigenEvent {
            time,
            antigen_type: ty.into(),
        })
    }

    fn signal(time: f64, danger: f64, safe: f64) -> Event {
        Event::Signal(SignalInstance { time, danger, safe })
    }

    fn config(num_cells: usize, lifespan_limit: f64) -> EngineConfig {
        EngineConfig {
            num_cells,
            lifespan_limit,
            flush_at_end: false,
        }
    }

    // --- population initialization ---

    #[test]
    fn default_population_lifespans_are_one_to_one_hundred() {
        let engine = Engine::new(EngineConfig::default()).unwrap();
        let lifespans: Vec<f64> = engine.cells().iter().map(|c| c.initial_lifespan).collect();
        assert_eq!(lifespans.len(), 100);
        for (i, l) in lifespans.iter().enumerate() {
            assert_eq!(*l, (i + 1) as f64);
        }
        assert_eq!(lifespans[0], 1.0);
        assert_eq!(lifespans[99], 100.0);
    }

    #[test]
    fn single_cell_population_gets_the_full_limit() {
        let engine = Engine::new(config(1, 100.0)).unwrap();
        assert_eq!(engine.cells().len(), 1);
        assert_eq!(engine.cells()[0].initial_lifespan, 100.0);
    }

    #[test]
    fn four_cell_population_spans_quarter_steps() {
        let engine = Engine::new(config(4, 100.0)).unwrap();
        let lifespans: Vec<f64> = engine.cells().iter().map(|c| c.initial_lifespan).collect();
        assert_eq!(lifespans, [25.0, 50.0, 75.0, 100.0]);
    }

    #[test]
    fn rejects_zero_cells_and_non_positive_limit() {
        assert_eq!(
            Engine::new(config(0, 100.0)).err(),
            Some(EngineError::ZeroCells)
        );
        assert_eq!(
            Engine::new(config(10, 0.0)).err(),
            Some(EngineError::NonPositiveLifespanLimit { limit: 0.0 })
        );
        assert!(matches!(
            Engine::new(config(10, -3.5)),
            Err(EngineError::NonPositiveLifespanLimit { .. })
        ));
    }

    // --- signal processing ---

    #[test]
    fn process_signal_on_representative_means() {
        let p = process_signal(21.8, 15.0);
        assert_eq!(p.csm, 21.8 + 15.0);
        assert_eq!(p.k, 15.0 - 2.0 * 21.8);
        assert!((p.csm - 36.8).abs() < 1e-12);
        assert!((p.k - (-28.6)).abs() < 1e-12);
    }

    #[test]
    fn process_signal_zero_input_is_zero_output() {
        let p = process_signal(0.0, 0.0);
        assert_eq!(p.csm, 0.0);
        assert_eq!(p.k, 0.0);
    }

    #[test]
    fn process_signal_context_sign_boundary() {
        // k crosses zero exactly where danger equals twice safe.
        let p = process_signal(10.0, 20.0);
        assert_eq!(p.csm, 30.0);
        assert_eq!(p.k, 0.0);
    }

    // --- antigen ingestion ---

    #[test]
    fn round_robin_starts_at_cell_one() {
        // Counter increments before indexing: with three cells, four
        // successive antigens land in cells 1, 2, 0, 1.
        let mut engine = Engine::new(config(3, 30.0)).unwrap();
        let expected_cells = [1usize, 2, 0, 1];
        for (i, expected) in expected_cells.iter().enumerate() {
            let before: Vec<u64> = engine
                .cells()
                .iter()
                .map(|c| c.profile.values().sum())
                .collect();
            engine.ingest_antigen(&AntigenEvent {
                time: i as f64,
                antigen_type: "p".into(),
            });
            let after: Vec<u64> = engine
                .cells()
                .iter()
                .map(|c| c.profile.values().sum())
                .collect();
            for cell in 0..3 {
                let expected_delta = u64::from(cell == *expected);
                assert_eq!(
                    after[cell] - before[cell],
                    expected_delta,
                    "antigen {i} should land in cell {expected}"
                );
            }
        }
        assert_eq!(engine.cells()[0].profile.get("p"), Some(&1));
        assert_eq!(engine.cells()[1].profile.get("p"), Some(&2));
        assert_eq!(engine.cells()[2].profile.get("p"), Some(&1));
    }

    #[test]
    fn single_cell_absorbs_everything() {
        let mut engine = Engine::new(config(1, 10.0)).unwrap();
        for i in 0..5 {
            engine.ingest_antigen(&AntigenEvent {
                time: i as f64,
                antigen_type: "x".into(),
            });
        }
        assert_eq!(engine.cells()[0].profile.get("x"), Some(&5));
    }

    #[test]
    fn repeated_type_counts_accumulate_in_one_cell() {
        let mut engine = Engine::new(config(2, 10.0)).unwrap();
        // Counter 1 -> cell 1, counter 2 -> cell 0, counter 3 -> cell 1.
        for i in 0..3 {
            engine.ingest_antigen(&AntigenEvent {
                time: i as f64,
                antigen_type: "x".into(),
            });
        }
        assert_eq!(engine.cells()[1].profile.get("x"), Some(&2));
        assert_eq!(engine.cells()[0].profile.get("x"), Some(&1));
    }

    // --- signal ingestion ---

    #[test]
    fn signal_application_decrements_and_accumulates() {
        let mut engine = Engine::new(config(1, 40.0)).unwrap();
        engine.ingest_signal(&SignalInstance {
            time: 1.0,
            danger: 15.0,
            safe: 21.8,
        });
        let cell = &engine.cells()[0];
        assert_eq!(cell.lifespan, 40.0 - (21.8 + 15.0));
        assert_eq!(cell.k_sum, 15.0 - 2.0 * 21.8);
        assert_eq!(cell.iterations, 1);
        assert!(engine.records().is_empty());
    }

    #[test]
    fn presentation_absorbs_triggering_instance_then_resets() {
        let mut engine = Engine::new(config(1, 40.0)).unwrap();
        let instance = SignalInstance {
            time: 1.0,
            danger: 15.0,
            safe: 21.8,
        };
        engine.ingest_signal(&instance);
        assert!(engine.records().is_empty());
        engine.ingest_signal(&SignalInstance { time: 2.0, ..instance });
        // Second application pushes lifespan to 40 - 2*36.8 < 0: the record
        // carries both instances' context and two iterations.
        assert_eq!(engine.records().len(), 1);
        let record = &engine.records()[0];
        let k = 15.0 - 2.0 * 21.8;
        assert_eq!(record.k_value, k + k);
        assert!((record.k_value - (-57.2)).abs() < 1e-12);
        assert_eq!(record.iterations, 2);
        assert_eq!(record.presented_at, 2.0);
        // Reset completeness: the cell is back to its fresh state.
        let cell = &engine.cells()[0];
        assert_eq!(cell.lifespan, cell.initial_lifespan);
        assert_eq!(cell.k_sum, 0.0);
        assert!(cell.profile.is_empty());
        assert_eq!(cell.iterations, 0);
        assert_eq!(cell.incarnations, 1);
    }

    #[test]
    fn zero_csm_instance_counts_an_iteration_but_cannot_present() {
        let mut engine = Engine::new(config(2, 10.0)).unwrap();
        engine.ingest_signal(&SignalInstance {
            time: 1.0,
            danger: 0.0,
            safe: 0.0,
        });
        for cell in engine.cells() {
            assert_eq!(cell.lifespan, cell.initial_lifespan);
            assert_eq!(cell.iterations, 1);
        }
        assert!(engine.records().is_empty());
        let log = engine.finish();
        assert_eq!(log.signal_counter, 1);
    }

    // --- run_stream ---

    #[test]
    fn empty_stream_yields_empty_log() {
        let log = run_stream(&config(4, 100.0), &[]).unwrap();
        assert_eq!(log, RunLog::empty());
    }

    #[test]
    fn antigen_only_stream_presents_nothing() {
        let events = [antigen(0.0, "a"), antigen(1.0, "b"), antigen(2.0, "a")];
        let log = run_stream(&config(4, 100.0), &events).unwrap();
        assert!(log.records.is_empty());
        assert_eq!(log.antigen_counter, 3);
        assert_eq!(log.signal_counter, 0);
        assert_eq!(log.unpresented_profile.get("a"), Some(&2));
        assert_eq!(log.unpresented_profile.get("b"), Some(&1));
        assert_eq!(log.presented_total() + log.unpresented_total(), 3);
    }

    /// Hand-traced two-cell stream, worked out by hand before the engine
    /// was written; the independent oracle in the companion crate replays
    /// the same trace.
    ///
    /// Cells: lifespans {5, 10}. Stream: antigen a1 (-> cell 1), signal
    /// D=6/S=0 (csm=6, k=6; cell 0 hits 5-6 <= 0 and presents an *empty*
    /// profile with k=6), antigen a1 (-> cell 0), signal D=6/S=0 (cell 0
    /// presents {a1:1} with k=6 after 1 iteration; cell 1 hits 10-12 <= 0
    /// and presents {a1:1} with k=12 after 2 iterations).
    #[test]
    fn two_cell_hand_trace() {
        let events = [
            antigen(1.0, "a1"),
            signal(2.0, 6.0, 0.0),
            antigen(3.0, "a1"),
            signal(4.0, 6.0, 0.0),
        ];
        let log = run_stream(&config(2, 10.0), &events).unwrap();

        let mut profile_a1 = BTreeMap::new();
        profile_a1.insert(String::from("a1"), 1u64);
        let expected = [
            PresentationRecord {
                cell_index: 0,
                k_value: 6.0,
                profile: BTreeMap::new(),
                iterations: 1,
                presented_at: 2.0,
            },
            PresentationRecord {
                cell_index: 0,
                k_value: 6.0,
                profile: profile_a1.clone(),
                iterations: 1,
                presented_at: 4.0,
            },
            PresentationRecord {
                cell_index: 1,
                k_value: 12.0,
                profile: profile_a1,
                iterations: 2,
                presented_at: 4.0,
            },
        ];
        assert_eq!(log.records, expected);
        assert_eq!(log.antigen_counter, 2);
        assert_eq!(log.signal_counter, 2);
        assert_eq!(log.total_incarnations, 3);
        assert!(log.unpresented_profile.is_empty());
        assert_eq!(log.presented_total(), 2);
    }

    #[test]
    fn rejects_strictly_decreasing_timestamps() {
        let events = [signal(2.0, 1.0, 1.0), antigen(1.0, "a")];
        let err = run_stream(&config(2, 10.0), &events).unwrap_err();
        assert_eq!(
            err,
            EngineError::UnsortedStream {
                index: 1,
                prev_time: 2.0,
                time: 1.0
            }
        );
    }

    #[test]
    fn equal_timestamps_are_accepted() {
        let events = [antigen(1.0, "a"), signal(1.0, 5.0, 5.0)];
        assert!(run_stream(&config(2, 10.0), &events).is_ok());
    }

    #[test]
    fn flush_emits_stranded_antigen_and_empties_unpresented() {
        let events = [
            antigen(1.0, "a1"),
            signal(2.0, 6.0, 0.0),
            antigen(3.0, "a1"),
            signal(4.0, 6.0, 0.0),
            antigen(5.0, "a1"), // counter 3 -> cell 1, never presented
        ];
        let no_flush = run_stream(&config(2, 10.0), &events).unwrap();
        assert_eq!(no_flush.unpresented_profile.get("a1"), Some(&1));
        assert_eq!(no_flush.records.len(), 3);

        let flushed = run_stream(
            &EngineConfig {
                num_cells: 2,
                lifespan_limit: 10.0,
                flush_at_end: true,
            },
            &events,
        )
        .unwrap();
        assert!(flushed.unpresented_profile.is_empty());
        assert_eq!(flushed.records.len(), 4);
        let last = flushed.records.last().unwrap();
        assert_eq!(last.cell_index, 1);
        assert_eq!(last.profile.get("a1"), Some(&1));
        assert_eq!(last.presented_at, 5.0);
        // Flush records carry whatever context the cell had (none here —
        // the cell was reset by the second signal before the antigen).
        assert_eq!(last.k_value, 0.0);
        assert_eq!(last.iterations, 0);
        assert_eq!(
            flushed.presented_total() + flushed.unpresented_total(),
            flushed.antigen_counter
        );
    }

    #[test]
    fn flush_on_empty_profiles_emits_nothing() {
        let events = [signal(1.0, 6.0, 0.0)];
        let log = run_stream(
            &EngineConfig {
                num_cells: 2,
                lifespan_limit: 10.0,
                flush_at_end: true,
            },
            &events,
        )
        .unwrap();
        // Cell 0 presented (empty profile) on the signal; cell 1 is live
        // but holds no antigen, so flush adds nothing.
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.total_incarnations, 1);
    }

    // --- statistics ---

    #[test]
    fn statistics_match_uniform_iterations() {
        let record = |iterations| PresentationRecord {
            cell_index: 0,
            k_value: -1.0,
            profile: BTreeMap::new(),
            iterations,
            presented_at: 0.0,
        };
        let log = RunLog {
            records: alloc::vec![record(2), record(2), record(2)],
            antigen_counter: 0,
            signal_counter: 6,
            total_incarnations: 3,
            unpresented_profile: BTreeMap::new(),
        };
        let stats = cell_statistics(&log, &config(1, 10.0));
        assert_eq!(stats.mean_iterations, Some(2.0));
        assert_eq!(stats.mean_incarnations, Some(3.0));
    }

    #[test]
    fn statistics_absent_on_empty_log() {
        let stats = cell_statistics(&RunLog::empty(), &config(5, 10.0));
        assert_eq!(stats.mean_iterations, None);
        assert_eq!(stats.mean_incarnations, None);
    }

    #[test]
    fn statistics_average_mixed_iterations() {
        let record = |iterations| PresentationRecord {
            cell_index: 0,
            k_value: 0.0,
            profile: BTreeMap::new(),
            iterations,
            presented_at: 0.0,
        };
        let log = RunLog {
            records: alloc::vec![record(1), record(3)],
            antigen_counter: 0,
            signal_counter: 4,
            total_incarnations: 2,
            unpresented_profile: BTreeMap::new(),
        };
        let stats = cell_statistics(&log, &config(2, 10.0));
        assert_eq!(stats.mean_iterations, Some(2.0));
        assert_eq!(stats.mean_incarnations, Some(1.0));
    }
}
