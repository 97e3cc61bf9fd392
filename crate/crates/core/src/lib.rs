//! Deterministic dendritic-cell anomaly engine.
//!
//! A fixed population of artificial dendritic cells consumes a time-ordered
//! stream of *antigen events* (typed occurrences to be classified, e.g.
//! process IDs) and *signal instances* (normalized danger/safe measurement
//! pairs describing system context). Antigens are distributed round-robin
//! across the population and counted per type in each cell's profile; every
//! signal instance is processed once into a shared `(csm, k)` pair applied
//! uniformly to all cells. The costimulation value `csm` drains each cell's
//! lifespan budget; the context value `k` accumulates as danger-vs-safe
//! evidence. When a cell's lifespan is exhausted it *presents* — logs its
//! accumulated context and antigen profile — and resets. Per-type anomaly
//! scores (MCAV and K-alpha) and run-derived classification thresholds are
//! computed from the presentation log after the run.
//!
//! The crate is `no_std` (with `alloc`) and contains no randomness, no
//! clocks, and no IO: identical configuration and input always produce
//! bit-identical output. File formats, the CLI, timing, and the experiment
//! harness live in the companion `ddca-cli` crate.
//!
//! # Module map
//!
//! - [`engine`] — event types, the cell population, the deterministic event
//!   loop, and per-run cell statistics.
//! - [`metrics`] — per-antigen-type scores (MCAV, K-alpha), run-derived
//!   thresholds, and classification.
//! - [`stream`] — the canonical ordered event stream container.
//! - [`scenario`] — seeded synthetic port-scan scenario generation and the
//!   signal time-shift transform.
//! - [`pipeline`] — convenience glue running engine → statistics →
//!   thresholds → reports in one call.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod engine;
pub mod metrics;
pub mod pipeline;
pub mod scenario;
pub mod stream;

pub use engine::{
    cell_statistics, process_signal, run_stream, AntigenEvent, CellStats, DendriticCell, Engine,
    EngineConfig, EngineError, Event, PresentationRecord, ProcessedSignal, RunLog, SignalInstance,
};
pub use metrics::{
    build_reports, classify, derive_thresholds, k_alpha, mcav, mcav_threshold, t_k_threshold,
    AntigenTypeReport, Classification, KAlphaMode, MetricsError, ThresholdSet,
};
pub use pipeline::{analyze, finish_analysis, signal_instances, RunAnalysis};
pub use scenario::{
    generate_scenario, portscan_default, shift_signals, Lcg, ProcessRole, ProcessSpec,
    ScenarioError, ScenarioSpec,
};
pub use stream::{EventStream, StreamMeta};
