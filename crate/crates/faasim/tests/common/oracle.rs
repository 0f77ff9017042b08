//! Brute-force reference simulator.
//!
//! Tracks every worker individually and rescans all of them at every
//! timestep, following the timestep protocol literally: COMPLETE, EVICT,
//! ASSIGN (one arrival at a time, lowest idle duration first, ties to the
//! most recently created worker), RECORD. Deliberately shares no code with
//! the engine under test.

use std::collections::HashMap;

use faasim::simcore::{KeepAlivePolicy, SimConfig, SimResult, TimestepMetrics};
use faasim::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Busy { busy_until_ms: u64 },
    Idle { idle_since_s: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Worker {
    state: State,
    created_seq: u64,
}

pub fn simulate_reference(trace: &Trace, config: &SimConfig) -> SimResult {
    let mut fleets: HashMap<&str, Vec<Worker>> = HashMap::new();
    for rec in &trace.records {
        fleets.entry(rec.function.as_str()).or_default();
    }
    let mut next_seq = 0u64;
    let mut cursor = 0usize;
    let mut series = Vec::new();

    for t in 0..trace.horizon_s {
        let mut cold_starts = 0;
        let mut warm_starts = 0;
        let mut evictions = 0;

        for fleet in fleets.values_mut() {
            // COMPLETE
            for worker in fleet.iter_mut() {
                if let State::Busy { busy_until_ms } = worker.state {
                    if busy_until_ms <= t * 1000 {
                        worker.state = State::Idle { idle_since_s: t };
                    }
                }
            }
            // EVICT
            match config.keepalive {
                KeepAlivePolicy::FixedTimeout { timeout_s } => {
                    let before = fleet.len();
                    fleet.retain(|w| match w.state {
                        State::Idle { idle_since_s } => t - idle_since_s <= timeout_s,
                        State::Busy { .. } => true,
                    });
                    evictions += (before - fleet.len()) as u64;
                }
                KeepAlivePolicy::HalvingInterval { interval_s } => {
                    if t > 0 && t % interval_s == 0 {
                        let mut idle: Vec<(u64, u64, usize)> = fleet
                            .iter()
                            .enumerate()
                            .filter_map(|(i, w)| match w.state {
                                State::Idle { idle_since_s } => {
                                    Some((idle_since_s, w.created_seq, i))
                                }
                                State::Busy { .. } => None,
                            })
                            .collect();
                        // Longest idle first: smallest idle_since.
                        idle.sort();
                        let to_evict = idle.len() / 2;
                        let mut doomed: Vec<usize> =
                            idle[..to_evict].iter().map(|&(_, _, i)| i).collect();
                        doomed.sort_unstable_by(|a, b| b.cmp(a));
                        for i in doomed {
                            fleet.remove(i);
                        }
                        evictions += to_evict as u64;
                    }
                }
                KeepAlivePolicy::None => {
                    let before = fleet.len();
                    fleet.retain(|w| matches!(w.state, State::Busy { .. }));
                    evictions += (before - fleet.len()) as u64;
                }
            }
        }

        // ASSIGN, one arrival at a time
        while cursor < trace.records.len() && trace.records[cursor].t == t {
            let rec = &trace.records[cursor];
            let fleet = fleets.get_mut(rec.function.as_str()).expect("fleet exists");
            for _ in 0..rec.count {
                let chosen = fleet
                    .iter()
                    .enumerate()
                    .filter_map(|(i, w)| match w.state {
                        State::Idle { idle_since_s } => Some((idle_since_s, w.created_seq, i)),
                        State::Busy { .. } => None,
                    })
                    .max();
                let busy = State::Busy { busy_until_ms: t * 1000 + rec.duration_ms };
                match chosen {
                    Some((_, _, i)) => {
                        fleet[i].state = busy;
                        warm_starts += 1;
                    }
                    None => {
                        fleet.push(Worker { state: busy, created_seq: next_seq });
                        next_seq += 1;
                        cold_starts += 1;
                    }
                }
            }
            cursor += 1;
        }

        // RECORD
        let mut busy = 0;
        let mut idle = 0;
        for fleet in fleets.values() {
            for worker in fleet {
                match worker.state {
                    State::Busy { .. } => busy += 1,
                    State::Idle { .. } => idle += 1,
                }
            }
        }
        series.push(TimestepMetrics {
            t,
            busy,
            idle,
            cold_starts,
            warm_starts,
            evictions,
            total: busy + idle,
        });
    }

    SimResult::from_series(series)
}
