//! Worker-pool replay of invocation traces.
//!
//! [`simulate`] steps a [`Trace`](crate::trace::Trace) through per-function
//! worker pools at one-second granularity. Within every timestep the engine
//! runs four phases in a fixed order:
//!
//! 1. **COMPLETE**: busy workers whose execution has finished become idle;
//! 2. **EVICT**: the keep-alive policy removes idle workers;
//! 3. **ASSIGN**: each arrival takes the idle worker with the lowest idle
//!    time, or cold-starts a new one;
//! 4. **RECORD**: a [`TimestepMetrics`] snapshot is taken.
//!
//! A worker finishing at second `t` can therefore serve a new arrival at `t`,
//! but two arrivals within the same second never share a worker.

mod engine;
mod pool;

pub use engine::simulate;
pub use pool::WorkerPool;

use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::trace::Violation;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("trace failed validation: {}", format_violations(.0))]
    InvalidTrace(Vec<Violation>),
    #[error("empty metrics series")]
    EmptySeries,
    #[error("metrics line {line}: {message}")]
    MalformedMetrics { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    let mut message = shown.join("; ");
    if violations.len() > 3 {
        message.push_str(&format!("; … {} more", violations.len() - 3));
    }
    message
}

/// How long idle workers are retained for warm reuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeepAlivePolicy {
    /// Evict a worker once it has been idle for strictly more than
    /// `timeout_s` (a worker idle exactly `timeout_s` survives).
    FixedTimeout { timeout_s: u64 },
    /// At every timestep divisible by `interval_s`, evict the
    /// `floor(n / 2)` longest-idle of a function's `n` idle workers.
    HalvingInterval { interval_s: u64 },
    /// Destroy workers as soon as their execution completes; the idle pool
    /// is always empty and every arrival is a cold start.
    None,
}

impl FromStr for KeepAlivePolicy {
    type Err = String;

    /// Accepts `fixed:<seconds>`, `halving:<seconds>`, or `none`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(KeepAlivePolicy::None);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected fixed:<s>, halving:<s>, or none, got {s:?}"))?;
        let seconds: u64 = value
            .parse()
            .map_err(|_| format!("{value:?} is not a whole number of seconds"))?;
        match kind {
            "fixed" => Ok(KeepAlivePolicy::FixedTimeout { timeout_s: seconds }),
            "halving" => {
                if seconds == 0 {
                    return Err("halving interval must be at least 1 s".to_string());
                }
                Ok(KeepAlivePolicy::HalvingInterval { interval_s: seconds })
            }
            other => Err(format!("unknown keep-alive policy {other:?}")),
        }
    }
}

impl std::fmt::Display for KeepAlivePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeepAlivePolicy::FixedTimeout { timeout_s } => write!(f, "fixed:{timeout_s}"),
            KeepAlivePolicy::HalvingInterval { interval_s } => write!(f, "halving:{interval_s}"),
            KeepAlivePolicy::None => write!(f, "none"),
        }
    }
}

/// Idle-worker selection rule. Only lowest-idle-time-first exists today; the
/// tag keeps configs explicit about what they ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulerPolicy {
    #[default]
    LowestIdleFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Fixed at 1 s; other values are rejected.
    pub timestep_s: u64,
    pub keepalive: KeepAlivePolicy,
    pub scheduler: SchedulerPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            timestep_s: 1,
            keepalive: KeepAlivePolicy::FixedTimeout { timeout_s: 900 },
            scheduler: SchedulerPolicy::LowestIdleFirst,
        }
    }
}

impl SimConfig {
    pub fn with_keepalive(keepalive: KeepAlivePolicy) -> Self {
        SimConfig { keepalive, ..SimConfig::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.timestep_s != 1 {
            return Err(SimError::InvalidConfig(format!(
                "timestep_s must be 1, got {}",
                self.timestep_s
            )));
        }
        if let KeepAlivePolicy::HalvingInterval { interval_s: 0 } = self.keepalive {
            return Err(SimError::InvalidConfig(
                "halving interval must be at least 1 s".to_string(),
            ));
        }
        Ok(())
    }
}

/// Worker-pool occupancy observed at the end of one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimestepMetrics {
    pub t: u64,
    pub busy: u64,
    pub idle: u64,
    /// Workers created during this step.
    pub cold_starts: u64,
    /// Arrivals served by an existing idle worker during this step.
    pub warm_starts: u64,
    pub evictions: u64,
    /// `busy + idle`.
    pub total: u64,
}

/// Exact sums and maxima over a metrics series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimTotals {
    pub requests: u64,
    pub cold_starts: u64,
    pub warm_starts: u64,
    pub evictions: u64,
    /// `Σ_t idle(t) × 1 s`.
    pub idle_worker_seconds: u64,
    pub busy_worker_seconds: u64,
    pub peak_total_workers: u64,
}

/// Result of replaying a trace: one metrics row per timestep plus totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub series: Vec<TimestepMetrics>,
    pub totals: SimTotals,
}

impl SimResult {
    /// Rebuilds a result from a raw series, recomputing all totals.
    pub fn from_series(series: Vec<TimestepMetrics>) -> SimResult {
        let mut totals = SimTotals::default();
        for m in &series {
            totals.requests += m.cold_starts + m.warm_starts;
            totals.cold_starts += m.cold_starts;
            totals.warm_starts += m.warm_starts;
            totals.evictions += m.evictions;
            totals.idle_worker_seconds += m.idle;
            totals.busy_worker_seconds += m.busy;
            totals.peak_total_workers = totals.peak_total_workers.max(m.total);
        }
        SimResult { series, totals }
    }

    /// Minimum fleet capacity able to serve the trace at the same service
    /// level: the peak concurrent worker count.
    pub fn min_capacity(&self) -> Result<u64, SimError> {
        if self.series.is_empty() {
            return Err(SimError::EmptySeries);
        }
        Ok(self.totals.peak_total_workers)
    }
}

const METRICS_HEADER: &str = "t,busy,idle,cold_starts,warm_starts,evictions,total";

/// Writes the per-timestep series as plot-ready CSV.
pub fn write_metrics_csv<W: Write>(result: &SimResult, mut out: W) -> Result<(), SimError> {
    writeln!(out, "{METRICS_HEADER}")?;
    for m in &result.series {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.t, m.busy, m.idle, m.cold_starts, m.warm_starts, m.evictions, m.total
        )?;
    }
    Ok(())
}

/// Reads a metrics CSV produced by [`write_metrics_csv`], recomputing totals.
pub fn read_metrics_csv<R: BufRead>(input: R) -> Result<SimResult, SimError> {
    let mut series = Vec::new();
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != METRICS_HEADER {
                return Err(SimError::MalformedMetrics {
                    line: line_no,
                    message: format!("expected header {METRICS_HEADER:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(SimError::MalformedMetrics {
                line: line_no,
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let mut values = [0u64; 7];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| SimError::MalformedMetrics {
                line: line_no,
                message: format!("{field:?} is not a non-negative integer"),
            })?;
        }
        let m = TimestepMetrics {
            t: values[0],
            busy: values[1],
            idle: values[2],
            cold_starts: values[3],
            warm_starts: values[4],
            evictions: values[5],
            total: values[6],
        };
        if m.total != m.busy + m.idle {
            return Err(SimError::MalformedMetrics {
                line: line_no,
                message: format!("total {} != busy {} + idle {}", m.total, m.busy, m.idle),
            });
        }
        if m.t != series.len() as u64 {
            return Err(SimError::MalformedMetrics {
                line: line_no,
                message: format!("expected t={}, found t={}", series.len(), m.t),
            });
        }
        series.push(m);
    }
    if series.is_empty() {
        return Err(SimError::EmptySeries);
    }
    Ok(SimResult::from_series(series))
}
