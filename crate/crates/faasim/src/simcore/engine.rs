use std::collections::HashMap;

use super::{SimConfig, SimError, SimResult, TimestepMetrics, WorkerPool};
use crate::trace::Trace;

/// Replays `trace` through per-function worker pools and records occupancy
/// for every timestep in `[0, horizon_s)`.
///
/// The run is sequential and deterministic: identical `(trace, config)`
/// inputs produce identical results. Pools never interact, so per-function
/// metrics sum to the global series.
///
/// Cost is `O(horizon × functions + records)`; a 24 h, 200-function trace
/// replays in seconds.
pub fn simulate(trace: &Trace, config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let violations = trace.validate();
    if !violations.is_empty() {
        return Err(SimError::InvalidTrace(violations));
    }

    let mut index = HashMap::new();
    let mut pool_of_record = Vec::with_capacity(trace.records.len());
    for rec in &trace.records {
        let next = index.len();
        let idx = *index.entry(&rec.function).or_insert(next);
        pool_of_record.push(idx);
    }
    let mut pools: Vec<WorkerPool> = vec![WorkerPool::new(); index.len()];

    let mut series = Vec::with_capacity(trace.horizon_s as usize);
    let mut cursor = 0;
    let mut busy_total = 0u64;
    let mut idle_total = 0u64;

    for t in 0..trace.horizon_s {
        let mut cold_starts = 0;
        let mut warm_starts = 0;
        let mut evictions = 0;

        for pool in &mut pools {
            let completed = pool.complete(t);
            busy_total -= completed;
            idle_total += completed;
            let evicted = pool.evict(config.keepalive, t);
            idle_total -= evicted;
            evictions += evicted;
        }

        while cursor < trace.records.len() && trace.records[cursor].t == t {
            let rec = &trace.records[cursor];
            let (warm, cold) = pools[pool_of_record[cursor]].assign(rec.count, rec.duration_ms, t);
            warm_starts += warm;
            cold_starts += cold;
            idle_total -= warm;
            busy_total += rec.count;
            cursor += 1;
        }

        series.push(TimestepMetrics {
            t,
            busy: busy_total,
            idle: idle_total,
            cold_starts,
            warm_starts,
            evictions,
            total: busy_total + idle_total,
        });
    }

    Ok(SimResult::from_series(series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::KeepAlivePolicy;
    use crate::trace::{ArrivalRecord, FunctionId, Trace};

    fn rec(t: u64, f: &str, count: u64, duration_ms: u64) -> ArrivalRecord {
        ArrivalRecord { t, function: FunctionId::new(f).unwrap(), count, duration_ms }
    }

    fn trace(records: Vec<ArrivalRecord>, horizon_s: u64) -> Trace {
        Trace::normalized(records, horizon_s)
    }

    fn fixed(timeout_s: u64) -> SimConfig {
        SimConfig::with_keepalive(KeepAlivePolicy::FixedTimeout { timeout_s })
    }

    /// Checks the conservation and demand invariants on every timestep.
    fn check_invariants(result: &SimResult, trace: &Trace) {
        let mut arrivals_at = vec![0u64; result.series.len()];
        for rec in &trace.records {
            arrivals_at[rec.t as usize] += rec.count;
        }
        let mut prev_total = 0u64;
        for m in &result.series {
            assert_eq!(m.total, m.busy + m.idle, "t={}", m.t);
            assert_eq!(
                m.total as i128 - prev_total as i128,
                m.cold_starts as i128 - m.evictions as i128,
                "worker conservation broken at t={}",
                m.t
            );
            assert_eq!(
                m.cold_starts + m.warm_starts,
                arrivals_at[m.t as usize],
                "demand not satisfied at t={}",
                m.t
            );
            prev_total = m.total;
        }
    }

    #[test]
    fn empty_trace_yields_all_zero_series() {
        let trace = Trace { records: vec![], horizon_s: 10 };
        let result = simulate(&trace, &fixed(900)).unwrap();
        assert_eq!(result.series.len(), 10);
        assert!(result.series.iter().all(|m| *m == TimestepMetrics { t: m.t, ..Default::default() }));
        assert_eq!(result.totals.requests, 0);
    }

    #[test]
    fn warm_reuse_hand_trace() {
        // One function, arrivals at t=0 and t=2 (1000 ms each), 900 s timeout.
        // Hand-stepped: the worker created at t=0 completes at t=1, idles,
        // and serves the t=2 arrival warm.
        let trace = trace(vec![rec(0, "f1", 1, 1000), rec(2, "f1", 1, 1000)], 4);
        let result = simulate(&trace, &fixed(900)).unwrap();

        let expect = [
            // (busy, idle, cold, warm)
            (1, 0, 1, 0),
            (0, 1, 0, 0),
            (1, 0, 0, 1),
            (0, 1, 0, 0),
        ];
        for (m, &(busy, idle, cold, warm)) in result.series.iter().zip(&expect) {
            assert_eq!((m.busy, m.idle, m.cold_starts, m.warm_starts), (busy, idle, cold, warm), "t={}", m.t);
        }
        assert_eq!(result.totals.cold_starts, 1);
        assert_eq!(result.totals.warm_starts, 1);
        assert_eq!(result.totals.idle_worker_seconds, 2);
        assert_eq!(result.totals.busy_worker_seconds, 2);
        assert_eq!(result.totals.peak_total_workers, 1);
        check_invariants(&result, &trace);
    }

    #[test]
    fn simultaneous_arrivals_never_share_a_worker() {
        let trace = trace(vec![rec(0, "f1", 2, 100)], 2);
        let result = simulate(&trace, &fixed(900)).unwrap();
        assert_eq!(result.series[0].cold_starts, 2);
        assert_eq!(result.totals.peak_total_workers, 2);
        check_invariants(&result, &trace);
    }

    #[test]
    fn fixed_timeout_evicts_after_inclusive_window() {
        // Worker idles from t=1; with a 5 s timeout it survives through
        // t=6 (idle exactly 5 s) and is evicted at t=7.
        let trace = trace(vec![rec(0, "f1", 1, 1000)], 9);
        let result = simulate(&trace, &fixed(5)).unwrap();
        let idle: Vec<u64> = result.series.iter().map(|m| m.idle).collect();
        assert_eq!(idle, vec![0, 1, 1, 1, 1, 1, 1, 0, 0]);
        assert_eq!(result.series[7].evictions, 1);
        check_invariants(&result, &trace);
    }

    #[test]
    fn halving_interval_runs_on_global_clock() {
        let trace = trace(vec![rec(0, "f1", 5, 1000)], 1000);
        let config = SimConfig::with_keepalive(KeepAlivePolicy::HalvingInterval { interval_s: 380 });
        let result = simulate(&trace, &config).unwrap();
        assert_eq!(result.series[380].evictions, 2, "floor(5/2) evicted at t=380");
        assert_eq!(result.series[380].idle, 3);
        assert_eq!(result.series[760].evictions, 1, "floor(3/2) evicted at t=760");
        assert_eq!(result.series[760].idle, 2);
        assert_eq!(result.totals.evictions, 3);
        check_invariants(&result, &trace);
    }

    #[test]
    fn none_policy_keeps_pool_empty_and_counts_evictions() {
        let trace = trace(vec![rec(0, "f1", 2, 1500), rec(3, "f1", 1, 1500)], 6);
        let config = SimConfig::with_keepalive(KeepAlivePolicy::None);
        let result = simulate(&trace, &config).unwrap();
        assert!(result.series.iter().all(|m| m.idle == 0));
        assert_eq!(result.totals.cold_starts, 3, "every arrival cold-starts");
        assert_eq!(result.totals.warm_starts, 0);
        assert_eq!(result.totals.evictions, 3, "completion destroys the worker");
        assert_eq!(result.series[2].evictions, 2);
        check_invariants(&result, &trace);
    }

    #[test]
    fn long_idle_worker_is_never_chosen_and_expires() {
        // Two workers idle from t=1. Sparse arrivals every 30 s keep exactly
        // one of them warm; the other is never preferred and expires once its
        // idle time exceeds the 900 s timeout, at t=902.
        let mut records = vec![rec(0, "f1", 2, 500)];
        let mut arrivals = 0;
        let mut t = 31;
        while t < 1000 {
            records.push(rec(t, "f1", 1, 500));
            arrivals += 1;
            t += 30;
        }
        let trace = trace(records, 1000);
        let result = simulate(&trace, &fixed(900)).unwrap();
        assert_eq!(result.totals.cold_starts, 2, "only the initial pair cold-starts");
        assert_eq!(result.totals.warm_starts, arrivals);
        assert_eq!(result.totals.evictions, 1);
        assert_eq!(result.series[902].evictions, 1, "long-idle worker expires at t=902");
        check_invariants(&result, &trace);
    }

    #[test]
    fn pools_are_independent_across_functions() {
        let a = vec![rec(0, "fa", 3, 700), rec(4, "fa", 1, 2300)];
        let b = vec![rec(1, "fb", 2, 1500), rec(4, "fb", 4, 100)];
        let horizon = 12;
        let config = fixed(2);

        let combined = {
            let mut records = a.clone();
            records.extend(b.clone());
            simulate(&trace(records, horizon), &config).unwrap()
        };
        let alone_a = simulate(&trace(a, horizon), &config).unwrap();
        let alone_b = simulate(&trace(b, horizon), &config).unwrap();

        for t in 0..horizon as usize {
            let (ma, mb, m) = (&alone_a.series[t], &alone_b.series[t], &combined.series[t]);
            assert_eq!(m.busy, ma.busy + mb.busy, "t={t}");
            assert_eq!(m.idle, ma.idle + mb.idle, "t={t}");
            assert_eq!(m.cold_starts, ma.cold_starts + mb.cold_starts, "t={t}");
            assert_eq!(m.warm_starts, ma.warm_starts + mb.warm_starts, "t={t}");
            assert_eq!(m.evictions, ma.evictions + mb.evictions, "t={t}");
        }
    }

    #[test]
    fn rejects_invalid_trace_before_stepping() {
        let bad = Trace { records: vec![rec(5, "f1", 1, 100)], horizon_s: 3 };
        assert!(matches!(simulate(&bad, &fixed(900)), Err(SimError::InvalidTrace(_))));
    }

    #[test]
    fn identical_inputs_give_identical_results() {
        let trace = trace(
            vec![rec(0, "f1", 2, 900), rec(1, "f2", 1, 1500), rec(3, "f1", 4, 300)],
            8,
        );
        let config = fixed(2);
        assert_eq!(simulate(&trace, &config).unwrap(), simulate(&trace, &config).unwrap());
    }
}
