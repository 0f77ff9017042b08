//! Per-second serverless invocation traces: ingestion, validation, summary
//! statistics, and synthetic generation.
//!
//! A [`Trace`] is a time-ordered list of [`ArrivalRecord`]s over a horizon of
//! whole seconds. Each record says "at second `t`, `count` invocations of
//! `function` arrived, each running for `duration_ms`". Heterogeneous
//! durations within one second are expressed as multiple records for the
//! same `(t, function)` pair.

mod io;
mod synth;

pub use io::{emit_trace_csv, parse_trace, TraceFormat};
pub use synth::{generate_synthetic, DurationModel, SynthSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised while building or parsing traces.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("input contains no arrival records")]
    Empty,
    #[error("invalid function id {0:?}: must be non-empty after trimming")]
    InvalidFunctionId(String),
    #[error("invalid generator spec: {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Stable identifier of one serverless function, non-empty after trimming.
///
/// Backed by a shared string so the millions of records in a day-scale trace
/// clone it cheaply.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionId(Arc<str>);

impl FunctionId {
    pub fn new(id: &str) -> Result<Self, TraceError> {
        let trimmed = id.trim();
        if trimmed.is_empty() {
            return Err(TraceError::InvalidFunctionId(id.to_string()));
        }
        Ok(FunctionId(Arc::from(trimmed)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether the id can appear in a canonical trace file without quoting.
    pub fn is_canonical(&self) -> bool {
        !self.0.is_empty()
            && self
                .0
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Invocations of one function arriving within one second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalRecord {
    /// Seconds since trace start.
    pub t: u64,
    pub function: FunctionId,
    /// Invocations arriving in `[t, t+1)`; at least 1.
    pub count: u64,
    /// Execution duration applied to each of these invocations; at least 1.
    pub duration_ms: u64,
}

/// A normalized invocation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// Records sorted by `(t, function, duration_ms)`, duplicates merged.
    pub records: Vec<ArrivalRecord>,
    /// Exclusive upper bound on `t` (86400 for a 24 h trace).
    pub horizon_s: u64,
}

/// One violated trace invariant, produced by [`Trace::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Short name of the violated invariant (`"horizon"`, `"ordering"`, …).
    pub invariant: &'static str,
    /// Index into `records` of the offending record, when one exists.
    pub record: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.record {
            Some(i) => write!(f, "{} (record {}): {}", self.invariant, i, self.message),
            None => write!(f, "{}: {}", self.invariant, self.message),
        }
    }
}

/// Summary statistics over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStats {
    pub total_requests: u64,
    /// `total_requests / horizon_s`.
    pub avg_rps: f64,
    pub function_count: usize,
    /// Largest total arrival count observed in any single second.
    pub max_per_second_arrivals: u64,
}

impl Trace {
    /// Builds a trace in normalized form: records sorted by
    /// `(t, function, duration_ms)` with duplicates of the same triple merged
    /// by summing their counts.
    pub fn normalized(mut records: Vec<ArrivalRecord>, horizon_s: u64) -> Trace {
        records.sort_by(|a, b| {
            (a.t, &a.function, a.duration_ms).cmp(&(b.t, &b.function, b.duration_ms))
        });
        let mut merged: Vec<ArrivalRecord> = Vec::with_capacity(records.len());
        for rec in records {
            match merged.last_mut() {
                Some(last)
                    if last.t == rec.t
                        && last.function == rec.function
                        && last.duration_ms == rec.duration_ms =>
                {
                    last.count += rec.count;
                }
                _ => merged.push(rec),
            }
        }
        Trace { records: merged, horizon_s }
    }

    /// Checks every trace invariant and reports each violation as data.
    ///
    /// An empty report means the trace is well-formed. Traces built through
    /// [`Trace::normalized`], [`parse_trace`], or [`generate_synthetic`]
    /// always validate cleanly; this exists for traces assembled by hand.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for (i, rec) in self.records.iter().enumerate() {
            if rec.t >= self.horizon_s {
                violations.push(Violation {
                    invariant: "horizon",
                    record: Some(i),
                    message: format!("t={} is not below horizon_s={}", rec.t, self.horizon_s),
                });
            }
            if rec.count == 0 {
                violations.push(Violation {
                    invariant: "count",
                    record: Some(i),
                    message: "count must be at least 1".to_string(),
                });
            }
            if rec.duration_ms == 0 {
                violations.push(Violation {
                    invariant: "duration",
                    record: Some(i),
                    message: "duration_ms must be at least 1".to_string(),
                });
            }
            if rec.function.as_str().trim().is_empty() {
                violations.push(Violation {
                    invariant: "function",
                    record: Some(i),
                    message: "function id is empty".to_string(),
                });
            }
            if i > 0 {
                let prev = &self.records[i - 1];
                let prev_key = (prev.t, &prev.function, prev.duration_ms);
                let key = (rec.t, &rec.function, rec.duration_ms);
                if prev_key > key {
                    violations.push(Violation {
                        invariant: "ordering",
                        record: Some(i),
                        message: format!(
                            "records not sorted by (t, function): {:?} after {:?}",
                            (rec.t, rec.function.as_str()),
                            (prev.t, prev.function.as_str())
                        ),
                    });
                } else if prev_key == key {
                    violations.push(Violation {
                        invariant: "duplicate",
                        record: Some(i),
                        message: format!(
                            "unmerged duplicate of (t={}, {}, {} ms)",
                            rec.t,
                            rec.function.as_str(),
                            rec.duration_ms
                        ),
                    });
                }
            }
        }
        violations
    }

    /// Totals computed over all records.
    pub fn stats(&self) -> TraceStats {
        let total_requests: u64 = self.records.iter().map(|r| r.count).sum();
        let functions: BTreeSet<&FunctionId> = self.records.iter().map(|r| &r.function).collect();
        let mut max_per_second = 0u64;
        let mut current_t = None;
        let mut current_sum = 0u64;
        for rec in &self.records {
            if current_t != Some(rec.t) {
                max_per_second = max_per_second.max(current_sum);
                current_t = Some(rec.t);
                current_sum = 0;
            }
            current_sum += rec.count;
        }
        max_per_second = max_per_second.max(current_sum);
        let avg_rps = if self.horizon_s == 0 {
            0.0
        } else {
            total_requests as f64 / self.horizon_s as f64
        };
        TraceStats {
            total_requests,
            avg_rps,
            function_count: functions.len(),
            max_per_second_arrivals: max_per_second,
        }
    }
}
