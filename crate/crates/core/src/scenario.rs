//! Seeded synthetic port-scan scenarios and the signal time-shift
//! transform.
//!
//! The generator builds desk-scale event streams shaped like a short
//! monitoring session: background processes emit antigen steadily while
//! signal instances are sampled once per period; inside a configured scan
//! window the danger signal rises and the safe signal falls (so the
//! per-instance context `danger - 2*safe` is positive on average inside
//! the window and negative outside it).
//!
//! # Reproducibility
//!
//! All randomness comes from [`Lcg`], a fixed 64-bit linear congruential
//! generator (`state = state * 6364136223846793005 + 1442695040888963407`,
//! mod 2^64; uniforms take the top 24 bits). The draw order is fixed:
//! antigen jitter first (processes in listed order, one uniform per event
//! in time order), then signal jitter in time order (danger, then safe,
//! per instance). Identical specs — seed included — therefore produce
//! byte-identical streams on any conforming implementation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{AntigenEvent, Event, SignalInstance};
use crate::stream::{EventStream, StreamMeta};

// ===== Deterministic generator =====

/// Minimal 64-bit linear congruential generator.
///
/// State advance: `state = state * 6364136223846793005 +
/// 1442695040888963407` (wrapping, i.e. mod 2^64). The multiplier/increment
/// pair is a widely used full-period choice for 64-bit LCGs. Uniform
/// samples use the *top* 24 bits of the advanced state, giving values on
/// the 2^-24 grid in `[0, 1)` — coarse enough that derived signal values
/// sum exactly in f64, fine enough for jitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    /// Seed the generator. The seed is the initial state verbatim.
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    /// Advance and return the full new state.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state
    }

    /// Uniform sample on the 2^-24 grid in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 40) as f64 / 16777216.0
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero. The tiny
    /// modulo bias is irrelevant at the bounds used here.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

// ===== Scenario parameters =====

/// Whether a process is part of the scenario's designed background or its
/// designed anomaly. Roles steer generation only (when the process is
/// active relative to the scan window is up to the caller); the engine
/// never sees them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessRole {
    Normal,
    Anomalous,
}

/// One antigen-emitting process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    /// Antigen type label the process emits. Must be non-empty and
    /// comma-free (it becomes a field of the stream file format).
    pub label: String,
    /// Mean antigen events per second while active; must be >= 0.
    pub rate: f64,
    /// Active window `(start, end)` within `[0, duration]`.
    pub active: (f64, f64),
    pub role: ProcessRole,
}

/// Complete description of one synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Session length in seconds; must be > 0.
    pub duration: f64,
    /// Seconds between signal instances (first instance at one period);
    /// must be > 0. Default shape uses 1.
    pub signal_period: f64,
    /// Antigen-emitting processes; at least one normal and one anomalous.
    pub processes: Vec<ProcessSpec>,
    /// `(start, end)` of the scan phase, within `[0, duration]`: signal
    /// instances with `start < t <= end` use the danger-dominant shape.
    pub scan_window: (f64, f64),
    /// Generator seed.
    pub seed: u64,
    /// Upper signal normalization bound; must be > 0. Default shape uses
    /// 50.
    pub normalization_max: f64,
}

/// Scenario validation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    NoProcesses,
    EmptyDuration { duration: f64 },
    BadSignalPeriod { period: f64 },
    BadNormalizationMax { max: f64 },
    BadProcessLabel { label: String },
    NegativeRate { label: String, rate: f64 },
    BadActiveWindow { label: String },
    BadScanWindow,
    MissingNormalProcess,
    MissingAnomalousProcess,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::NoProcesses => write!(f, "scenario has no processes"),
            ScenarioError::EmptyDuration { duration } => {
                write!(f, "scenario duration must be > 0, got {duration}")
            }
            ScenarioError::BadSignalPeriod { period } => {
                write!(f, "signal period must be > 0, got {period}")
            }
            ScenarioError::BadNormalizationMax { max } => {
                write!(f, "normalization max must be > 0, got {max}")
            }
            ScenarioError::BadProcessLabel { label } => {
                write!(f, "process label {label:?} must be non-empty and comma-free")
            }
            ScenarioError::NegativeRate { label, rate } => {
                write!(f, "process {label:?} has negative rate {rate}")
            }
            ScenarioError::BadActiveWindow { label } => {
                write!(f, "process {label:?} active window must satisfy 0 <= start <= end <= duration")
            }
            ScenarioError::BadScanWindow => {
                write!(f, "scan window must satisfy 0 <= start <= end <= duration")
            }
            ScenarioError::MissingNormalProcess => {
                write!(f, "scenario needs at least one normal process")
            }
            ScenarioError::MissingAnomalousProcess => {
                write!(f, "scenario needs at least one anomalous process")
            }
        }
    }
}

impl core::error::Error for ScenarioError {}

impl ScenarioSpec {
    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.duration > 0.0) {
            return Err(ScenarioError::EmptyDuration {
                duration: self.duration,
            });
        }
        if !(self.signal_period > 0.0) {
            return Err(ScenarioError::BadSignalPeriod {
                period: self.signal_period,
            });
        }
        if !(self.normalization_max > 0.0) {
            return Err(ScenarioError::BadNormalizationMax {
                max: self.normalization_max,
            });
        }
        if self.processes.is_empty() {
            return Err(ScenarioError::NoProcesses);
        }
        for process in &self.processes {
            if process.label.is_empty() || process.label.contains(',') {
                return Err(ScenarioError::BadProcessLabel {
                    label: process.label.clone(),
                });
            }
            if !(process.rate >= 0.0) {
                return Err(ScenarioError::NegativeRate {
                    label: process.label.clone(),
                    rate: process.rate,
                });
            }
            let (start, end) = process.active;
            if !(0.0 <= start && start <= end && end <= self.duration) {
                return Err(ScenarioError::BadActiveWindow {
                    label: process.label.clone(),
                });
            }
        }
        let (scan_start, scan_end) = self.scan_window;
        if !(0.0 <= scan_start && scan_start <= scan_end && scan_end <= self.duration) {
            return Err(ScenarioError::BadScanWindow);
        }
        if !self
            .processes
            .iter()
            .any(|p| p.role == ProcessRole::Normal)
        {
            return Err(ScenarioError::MissingNormalProcess);
        }
        if !self
            .processes
            .iter()
            .any(|p| p.role == ProcessRole::Anomalous)
        {
            return Err(ScenarioError::MissingAnomalousProcess);
        }
        Ok(())
    }
}

/// The bundled default scenario: a 38-second session with a port-scan
/// phase in seconds 20-30.
///
/// Two normal processes (`sshd` at 8/s and `bash` at 6/s) run the whole
/// session; two anomalous ones (`nmap` at 40/s in 20-30 and `pts` at 10/s
/// in 19-31) cluster around the scan window — about 1050 antigens in
/// total. Signal values are normalized to `[0, 50]`; the shape targets a
/// session mean near danger 15.0 / safe 21.8, putting the MCAV threshold
/// near 0.69.
pub fn portscan_default(seed: u64) -> ScenarioSpec {
    let process = |label: &str, rate: f64, active: (f64, f64), role: ProcessRole| ProcessSpec {
        label: String::from(label),
        rate,
        active,
        role,
    };
    ScenarioSpec {
        duration: 38.0,
        signal_period: 1.0,
        processes: alloc::vec![
            process("sshd", 8.0, (0.0, 38.0), ProcessRole::Normal),
            process("bash", 6.0, (0.0, 38.0), ProcessRole::Normal),
            process("nmap", 40.0, (20.0, 30.0), ProcessRole::Anomalous),
            process("pts", 10.0, (19.0, 31.0), ProcessRole::Anomalous),
        ],
        scan_window: (20.0, 30.0),
        seed,
        normalization_max: 50.0,
    }
}

// ===== Generation =====

/// Signal shape at normalization max 50 (scaled linearly for other
/// bounds): quiet phase danger 6 / safe 28.875, scan phase danger 40 /
/// safe 2, all jittered by +-1.5. Every value stays inside `[0, max]` by
/// construction; the bases are dyadic so signal totals sum exactly in f64.
const QUIET_DANGER: f64 = 6.0;
const QUIET_SAFE: f64 = 28.875;
const SCAN_DANGER: f64 = 40.0;
const SCAN_SAFE: f64 = 2.0;
const JITTER: f64 = 1.5;

fn round_count(x: f64) -> u64 {
    // Round half up; inputs are small non-negative rate*length products.
    (x + 0.5) as u64
}

fn clamp_signal(value: f64, max: f64) -> f64 {
    if value < 0.0 {
        0.0
    } else if value > max {
        max
    } else {
        value
    }
}

/// Generate the scenario's event stream. Pure function of its input
/// (seed included): identical [`ScenarioSpec`]s give byte-identical
/// streams.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<EventStream, ScenarioError> {
    spec.validate()?;
    let mut rng = Lcg::new(spec.seed);
    let mut events: Vec<Event> = Vec::new();

    // Antigens: per process, evenly spaced jittered arrivals across its
    // active window at the requested mean rate.
    for process in &spec.processes {
        let (start, end) = process.active;
        let length = end - start;
        let count = round_count(process.rate * length);
        if count == 0 {
            continue;
        }
        let step = length / count as f64;
        for i in 0..count {
            let jitter = rng.next_unit();
            let time = start + (i as f64 + jitter) * step;
            events.push(Event::Antigen(AntigenEvent {
                time,
                antigen_type: process.label.clone(),
            }));
        }
    }

    // Signals: one instance per period, first at one full period; the
    // scan-window test is start < t <= end.
    let scale = spec.normalization_max / 50.0;
    let instance_count = (spec.duration / spec.signal_period) as u64;
    for j in 1..=instance_count {
        let time = j as f64 * spec.signal_period;
        let in_scan = spec.scan_window.0 < time && time <= spec.scan_window.1;
        let (danger_base, safe_base) = if in_scan {
            (SCAN_DANGER, SCAN_SAFE)
        } else {
            (QUIET_DANGER, QUIET_SAFE)
        };
        let danger_jitter = JITTER * (2.0 * rng.next_unit() - 1.0);
        let safe_jitter = JITTER * (2.0 * rng.next_unit() - 1.0);
        let danger = clamp_signal((danger_base + danger_jitter) * scale, spec.normalization_max);
        let safe = clamp_signal((safe_base + safe_jitter) * scale, spec.normalization_max);
        events.push(Event::Signal(SignalInstance { time, danger, safe }));
    }

    Ok(EventStream::new(
        events,
        StreamMeta {
            source: None,
            seed: Some(spec.seed),
            normalization_max: spec.normalization_max,
        },
    ))
}

// ===== Time shift =====

/// Move every signal instance by `offset` seconds (positive delays,
/// negative advances); antigen events are untouched. Signals landing at
/// strictly negative times are dropped; the count of dropped signals is
/// returned alongside the re-sorted stream. An offset of zero returns the
/// stream unchanged.
pub fn shift_signals(stream: &EventStream, offset: f64) -> (EventStream, u64) {
    if offset == 0.0 {
        return (stream.clone(), 0);
    }
    let mut dropped: u64 = 0;
    let mut events: Vec<Event> = Vec::with_capacity(stream.events.len());
    for event in &stream.events {
        match event {
            Event::Antigen(_) => events.push(event.clone()),
            Event::Signal(s) => {
                let time = s.time + offset;
                if time < 0.0 {
                    dropped += 1;
                } else {
                    events.push(Event::Signal(SignalInstance { time, ..s.clone() }));
                }
            }
        }
    }
    (EventStream::new(events, stream.meta.clone()), dropped)
}

// ===== Tests =====
