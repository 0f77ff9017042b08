//! Per-function worker pool.
//!
//! Workers of one function are tracked as aggregate batches rather than
//! individuals: busy workers are keyed by completion timestep, idle workers
//! are a deque of `(idle_since, count)` batches ordered oldest-first.
//! Completions append at the recent end and expiry consumes the old end, so
//! day-scale traces that churn through millions of workers stay O(1)
//! amortized per event. Which of two equally-idle workers an operation
//! touches is not observable in the occupancy counts, so batching loses
//! nothing.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};

use super::KeepAlivePolicy;

#[derive(Debug, Clone, Copy)]
struct IdleBatch {
    /// Timestep at which these workers became idle.
    since: u64,
    count: u64,
}

/// Worker pool of a single function.
#[derive(Debug, Default, Clone)]
pub struct WorkerPool {
    /// Completion timestep → number of busy workers finishing there.
    busy: BTreeMap<u64, u64>,
    busy_count: u64,
    /// Idle batches ordered by `since` ascending: front = longest idle.
    idle: VecDeque<IdleBatch>,
    idle_count: u64,
}

impl WorkerPool {
    pub fn new() -> Self {
        WorkerPool::default()
    }

    pub fn busy(&self) -> u64 {
        self.busy_count
    }

    pub fn idle(&self) -> u64 {
        self.idle_count
    }

    /// COMPLETE phase: busy workers whose execution ends at or before
    /// timestep `t` become idle with `idle_since = t`. Returns how many
    /// completed. Must be called with strictly increasing `t`.
    pub fn complete(&mut self, t: u64) -> u64 {
        let mut completed = 0;
        while let Some(entry) = self.busy.first_entry() {
            if *entry.key() > t {
                break;
            }
            completed += entry.remove();
        }
        if completed > 0 {
            self.busy_count -= completed;
            self.idle_count += completed;
            debug_assert!(self.idle.back().is_none_or(|b| b.since < t));
            self.idle.push_back(IdleBatch { since: t, count: completed });
        }
        completed
    }

    /// EVICT phase: applies the keep-alive policy at timestep `t` and
    /// returns the number of workers evicted.
    pub fn evict(&mut self, policy: KeepAlivePolicy, t: u64) -> u64 {
        match policy {
            KeepAlivePolicy::FixedTimeout { timeout_s } => {
                // Idle duration t - since must exceed the timeout; a worker
                // idle exactly timeout_s survives.
                let mut evicted = 0;
                while let Some(front) = self.idle.front() {
                    if front.since.saturating_add(timeout_s) >= t {
                        break;
                    }
                    evicted += front.count;
                    self.idle.pop_front();
                }
                self.idle_count -= evicted;
                evicted
            }
            KeepAlivePolicy::HalvingInterval { interval_s } => {
                if t == 0 || !t.is_multiple_of(interval_s) {
                    return 0;
                }
                let target = self.idle_count / 2;
                self.take_oldest(target);
                target
            }
            KeepAlivePolicy::None => {
                let evicted = self.idle_count;
                self.idle.clear();
                self.idle_count = 0;
                evicted
            }
        }
    }

    /// ASSIGN phase: serves `arrivals` invocations of `duration_ms` each at
    /// timestep `t`, preferring idle workers with the lowest idle time.
    /// Returns `(warm_starts, cold_starts)`; every arrival occupies its own
    /// worker, so `warm + cold = arrivals`.
    pub fn assign(&mut self, arrivals: u64, duration_ms: u64, t: u64) -> (u64, u64) {
        let warm = arrivals.min(self.idle_count);
        self.take_newest(warm);
        let cold = arrivals - warm;
        // Completion lands on the first timestep boundary >= t*1000 + duration.
        let completion = t.saturating_add(duration_ms.div_ceil(1000));
        match self.busy.entry(completion) {
            Entry::Occupied(mut e) => *e.get_mut() += arrivals,
            Entry::Vacant(e) => {
                e.insert(arrivals);
            }
        }
        self.busy_count += arrivals;
        (warm, cold)
    }

    /// Removes `n` longest-idle workers from the pool.
    fn take_oldest(&mut self, mut n: u64) {
        self.idle_count -= n;
        while n > 0 {
            let front = self.idle.front_mut().expect("pool holds enough idle workers");
            if front.count > n {
                front.count -= n;
                return;
            }
            n -= front.count;
            self.idle.pop_front();
        }
    }

    /// Removes `n` most-recently-idled workers from the pool.
    fn take_newest(&mut self, mut n: u64) {
        self.idle_count -= n;
        while n > 0 {
            let back = self.idle.back_mut().expect("pool holds enough idle workers");
            if back.count > n {
                back.count -= n;
                return;
            }
            n -= back.count;
            self.idle.pop_back();
        }
    }

    #[cfg(test)]
    fn idle_batches(&self) -> Vec<(u64, u64)> {
        self.idle.iter().map(|b| (b.since, b.count)).collect()
    }
}
