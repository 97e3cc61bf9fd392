//! The canonical ordered event stream.
//!
//! A stream is a sequence of antigen events and signal instances sorted by
//! timestamp, with ties broken so that antigen events precede signal
//! instances at the same instant (evidence exists before the context that
//! judges it; a signal at time t therefore sees every antigen from time t).
//! Within one (time, kind) group the original order is preserved.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::engine::Event;

/// Descriptive stream metadata. Never load-bearing: the on-disk format
/// carries events only, so metadata does not survive a write/parse
/// round-trip and is excluded from stream equality.
#[derive(Debug, Clone)]
pub struct StreamMeta {
    /// Where the stream came from (a file path, a scenario name, ...).
    pub source: Option<String>,
    /// Generator seed, for synthetic streams.
    pub seed: Option<u64>,
    /// Upper normalization bound for signal values (lower bound is 0).
    pub normalization_max: f64,
}

impl Default for StreamMeta {
    fn default() -> Self {
        StreamMeta {
            source: None,
            seed: None,
            normalization_max: 50.0,
        }
    }
}

/// An ordered mixed event stream plus descriptive metadata.
#[derive(Debug, Clone, Default)]
pub struct EventStream {
    pub events: Vec<Event>,
    pub meta: StreamMeta,
}

/// Stream identity is the event sequence; metadata is descriptive only.
impl PartialEq for EventStream {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
    }
}

fn kind_rank(event: &Event) -> u8 {
    match event {
        Event::Antigen(_) => 0,
        Event::Signal(_) => 1,
    }
}

/// Stable canonical sort: by time, then antigen-before-signal.
///
/// Timestamps are expected finite (the parsing and generation boundaries
/// guarantee it); comparison treats any non-finite tie as equal.
pub(crate) fn canonical_sort(events: &mut [Event]) {
    events.sort_by(|a, b| {
        a.time()
            .partial_cmp(&b.time())
            .unwrap_or(Ordering::Equal)
            .then_with(|| kind_rank(a).cmp(&kind_rank(b)))
    });
}

impl EventStream {
    /// Build a canonical stream: events are stably sorted by (time,
    /// antigen-before-signal).
    pub fn new(mut events: Vec<Event>, meta: StreamMeta) -> Self {
        canonical_sort(&mut events);
        EventStream { events, meta }
    }

    /// Whether the event sequence is already in canonical order.
    pub fn is_canonical(&self) -> bool {
        self.events.windows(2).all(|pair| {
            let (a, b) = (&pair[0], &pair[1]);
            match a.time().partial_cmp(&b.time()) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => kind_rank(a) <= kind_rank(b),
                _ => false,
            }
        })
    }

    /// Number of signal instances in the stream.
    pub fn signal_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::Signal(_)))
            .count()
    }

    /// Number of antigen events in the stream.
    pub fn antigen_count(&self) -> usize {
        self.events.len() - self.signal_count()
    }
}
