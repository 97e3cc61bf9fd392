//! Independent brute-force reference implementation of the cell
//! population, used to cross-check the engine on small instances.
//!
//! Deliberately shares no logic with the engine crate: state lives in
//! plain vectors (profiles are bags of antigen labels, not count maps),
//! every rule is written out longhand at its point of use, and clarity is
//! preferred over speed throughout. Only the input/output types are
//! shared, so runs compare exactly. Intended for small instances (at most
//! ~1000 events and 16 cells).

use std::collections::BTreeMap;

use ddca_core::{
    AntigenEvent, EngineConfig, EngineError, Event, Lcg, PresentationRecord, RunLog,
    SignalInstance,
};

/// Draw one random small configuration and stream for a comparison
/// campaign: at most 20 events and 4 cells, lifespan limit in (0, 20],
/// times on a quarter-second grid (so equal timestamps occur), signal
/// values on a quarter grid in [0, 50].
pub fn random_small_instance(rng: &mut Lcg) -> (EngineConfig, Vec<Event>) {
    let config = EngineConfig {
        num_cells: 1 + rng.next_below(4) as usize,
        lifespan_limit: (1 + rng.next_below(80)) as f64 / 4.0,
        flush_at_end: rng.next_below(2) == 1,
    };
    let count = rng.next_below(21);
    let mut events = Vec::with_capacity(count as usize);
    let mut time = 0.0;
    for _ in 0..count {
        time += rng.next_below(8) as f64 / 4.0;
        if rng.next_below(5) < 2 {
            events.push(Event::Signal(SignalInstance {
                time,
                danger: rng.next_below(201) as f64 / 4.0,
                safe: rng.next_below(201) as f64 / 4.0,
            }));
        } else {
            let label = ["a", "b", "c"][rng.next_below(3) as usize];
            events.push(Event::Antigen(AntigenEvent {
                time,
                antigen_type: label.to_string(),
            }));
        }
    }
    (config, events)
}

struct OracleCell {
    index: usize,
    starting_lifespan: f64,
    lifespan: f64,
    context_total: f64,
    antigen_bag: Vec<String>,
    instances_seen: u64,
}

fn bag_to_profile(bag: &[String]) -> BTreeMap<String, u64> {
    let mut profile = BTreeMap::new();
    for label in bag {
        *profile.entry(label.clone()).or_insert(0) += 1;
    }
    profile
}

/// Run the population rules over the events, longhand.
pub fn oracle_run(config: &EngineConfig, events: &[Event]) -> Result<RunLog, EngineError> {
    if config.num_cells == 0 {
        return Err(EngineError::ZeroCells);
    }
    if !(config.lifespan_limit > 0.0) {
        return Err(EngineError::NonPositiveLifespanLimit {
            limit: config.lifespan_limit,
        });
    }

    // Cell i of N gets the i-th of N evenly spaced lifespans in
    // (0, limit]: limit * (i+1)/N.
    let mut cells: Vec<OracleCell> = Vec::new();
    for index in 0..config.num_cells {
        let lifespan =
            config.lifespan_limit * ((index + 1) as f64) / (config.num_cells as f64);
        cells.push(OracleCell {
            index,
            starting_lifespan: lifespan,
            lifespan,
            context_total: 0.0,
            antigen_bag: Vec::new(),
            instances_seen: 0,
        });
    }

    let mut records: Vec<PresentationRecord> = Vec::new();
    let mut antigens_ingested: u64 = 0;
    let mut signals_ingested: u64 = 0;
    let mut presentations: u64 = 0;
    let mut previous_time: Option<f64> = None;
    let mut latest_time: f64 = 0.0;

    for (position, event) in events.iter().enumerate() {
        let time = match event {
            Event::Antigen(a) => a.time,
            Event::Signal(s) => s.time,
        };
        if let Some(prev) = previous_time {
            if time < prev {
                return Err(EngineError::UnsortedStream {
                    index: position,
                    prev_time: prev,
                    time,
                });
            }
        }
        previous_time = Some(time);
        latest_time = time;

        match event {
            Event::Antigen(antigen) => {
                // Round-robin: the counter advances first, then picks the
                // cell by remainder.
                antigens_ingested += 1;
                let chosen = (antigens_ingested % config.num_cells as u64) as usize;
                cells[chosen].antigen_bag.push(antigen.antigen_type.clone());
            }
            Event::Signal(signal) => {
                signals_ingested += 1;
                let cost = signal.safe + signal.danger;
                let context = signal.danger - 2.0 * signal.safe;
                for cell in cells.iter_mut() {
                    cell.lifespan = cell.lifespan - cost;
                    cell.context_total = cell.context_total + context;
                    cell.instances_seen = cell.instances_seen + 1;
                    let expired = cell.lifespan <= 0.0;
                    if expired {
                        records.push(PresentationRecord {
                            cell_index: cell.index,
                            k_value: cell.context_total,
                            profile: bag_to_profile(&cell.antigen_bag),
                            iterations: cell.instances_seen,
                            presented_at: signal.time,
                        });
                        presentations += 1;
                        cell.lifespan = cell.starting_lifespan;
                        cell.context_total = 0.0;
                        cell.antigen_bag.clear();
                        cell.instances_seen = 0;
                    }
                }
            }
        }
    }

    if config.flush_at_end {
        for cell in cells.iter_mut() {
            if !cell.antigen_bag.is_empty() {
                records.push(PresentationRecord {
                    cell_index: cell.index,
                    k_value: cell.context_total,
                    profile: bag_to_profile(&cell.antigen_bag),
                    iterations: cell.instances_seen,
                    presented_at: latest_time,
                });
                presentations += 1;
                cell.lifespan = cell.starting_lifespan;
                cell.context_total = 0.0;
                cell.antigen_bag.clear();
                cell.instances_seen = 0;
            }
        }
    }

    let mut leftover: BTreeMap<String, u64> = BTreeMap::new();
    for cell in &cells {
        for label in &cell.antigen_bag {
            *leftover.entry(label.clone()).or_insert(0) += 1;
        }
    }

    Ok(RunLog {
        records,
        antigen_counter: antigens_ingested,
        signal_counter: signals_ingested,
        total_incarnations: presentations,
        unpresented_profile: leftover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ddca_core::{run_stream, AntigenEvent, SignalInstance};

    fn antigen(time: f64, label: &str) -> Event {
        Event::Antigen(AntigenEvent {
            time,
            antigen_type: label.to_string(),
        })
    }

    fn signal(time: f64, danger: f64, safe: f64) -> Event {
        Event::Signal(SignalInstance { time, danger, safe })
    }

    #[test]
    fn empty_stream_matches_engine() {
        let config = EngineConfig::default();
        assert_eq!(
            oracle_run(&config, &[]).unwrap(),
            run_stream(&config, &[]).unwrap()
        );
    }

    #[test]
    fn reproduces_the_two_cell_hand_trace() {
        // Same fixture as the engine's hand trace: two cells with
        // lifespans 5 and 10, an antigen/signal alternation where the
        // danger-only signal (cost 6) kills cell 0 twice and cell 1 once.
        let config = EngineConfig {
            num_cells: 2,
            lifespan_limit: 10.0,
            flush_at_end: false,
        };
        let events = [
            antigen(1.0, "a1"),
            signal(2.0, 6.0, 0.0),
            antigen(3.0, "a1"),
            signal(4.0, 6.0, 0.0),
        ];
        let log = oracle_run(&config, &events).unwrap();

        assert_eq!(log.records.len(), 3);
        assert_eq!(log.records[0].cell_index, 0);
        assert_eq!(log.records[0].k_value, 6.0);
        assert!(log.records[0].profile.is_empty());
        assert_eq!(log.records[0].presented_at, 2.0);
        assert_eq!(log.records[1].cell_index, 0);
        assert_eq!(log.records[1].profile.get("a1"), Some(&1));
        assert_eq!(log.records[2].cell_index, 1);
        assert_eq!(log.records[2].k_value, 12.0);
        assert_eq!(log.records[2].iterations, 2);
        assert_eq!(log.antigen_counter, 2);
        assert_eq!(log.signal_counter, 2);
        assert!(log.unpresented_profile.is_empty());

        assert_eq!(log, run_stream(&config, &events).unwrap());
    }

    #[test]
    fn rejects_the_same_invalid_inputs_as_the_engine() {
        let bad_order = [signal(2.0, 1.0, 1.0), antigen(1.0, "a")];
        let config = EngineConfig::default();
        assert_eq!(
            oracle_run(&config, &bad_order).unwrap_err(),
            run_stream(&config, &bad_order).unwrap_err()
        );
        let zero = EngineConfig {
            num_cells: 0,
            ..EngineConfig::default()
        };
        assert_eq!(oracle_run(&zero, &[]).unwrap_err(), EngineError::ZeroCells);
    }

    #[test]
    fn flush_matches_engine_on_a_stranded_antigen() {
        let config = EngineConfig {
            num_cells: 2,
            lifespan_limit: 10.0,
            flush_at_end: true,
        };
        let events = [
            antigen(1.0, "a1"),
            signal(2.0, 6.0, 0.0),
            antigen(3.0, "a1"),
            signal(4.0, 6.0, 0.0),
            antigen(5.0, "late"),
        ];
        let log = oracle_run(&config, &events).unwrap();
        assert_eq!(log, run_stream(&config, &events).unwrap());
        assert!(log.unpresented_profile.is_empty());
        assert_eq!(log.records.last().unwrap().presented_at, 5.0);
        assert_eq!(
            log.records.last().unwrap().profile.get("late"),
            Some(&1)
        );
    }
}
