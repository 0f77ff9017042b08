//! Trace file formats.
//!
//! The canonical format is a UTF-8 CSV with header `t,function,count,duration_ms`,
//! LF line endings, and function ids restricted to `[A-Za-z0-9_-]+` so no
//! quoting is ever needed. An optional comment line `# horizon_s=<n>` pins the
//! horizon when it exceeds `max(t) + 1`.
//!
//! The Huawei adapter reads the per-second request-count day files of the
//! Huawei production workload release: a wide matrix whose first column is the
//! second index and whose remaining columns are one function each, cell value
//! = invocations arriving in that second. Those files carry no execution
//! durations, so the adapter applies one configurable duration to every
//! invocation (see [`TraceFormat::Huawei`]); timestamps are rebased so the
//! first data row becomes second 0, which makes any day file of the release
//! usable as-is.

use std::io::{BufRead, Write};

use super::{ArrivalRecord, FunctionId, Trace, TraceError};

/// Input format accepted by [`parse_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    /// `t,function,count,duration_ms` rows.
    Canonical,
    /// Wide per-second request matrix; every invocation gets `duration_ms`.
    Huawei { duration_ms: u64 },
}

fn malformed(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Malformed { line, message: message.into() }
}

fn parse_u64(field: &str, name: &str, line: usize) -> Result<u64, TraceError> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| malformed(line, format!("{name} {field:?} is not a non-negative integer")))
}

/// Parses a trace from `input`, normalizing record order and merging
/// duplicate `(t, function, duration)` rows.
///
/// The horizon is `max(t) + 1` unless a `# horizon_s=<n>` header overrides it.
/// Inputs with no arrival records are an error, not an empty trace.
pub fn parse_trace<R: BufRead>(input: R, format: TraceFormat) -> Result<Trace, TraceError> {
    match format {
        TraceFormat::Canonical => parse_canonical(input),
        TraceFormat::Huawei { duration_ms } => parse_huawei(input, duration_ms),
    }
}

const CANONICAL_HEADER: &str = "t,function,count,duration_ms";

fn parse_canonical<R: BufRead>(input: R) -> Result<Trace, TraceError> {
    let mut records = Vec::new();
    let mut declared_horizon: Option<u64> = None;
    let mut max_t: Option<u64> = None;
    let mut saw_header = false;

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("horizon_s=") {
                let horizon = parse_u64(value, "horizon_s", line_no)?;
                if horizon == 0 {
                    return Err(malformed(line_no, "horizon_s must be at least 1"));
                }
                declared_horizon = Some(horizon);
            }
            continue;
        }
        if !saw_header {
            if line.trim() != CANONICAL_HEADER {
                return Err(malformed(
                    line_no,
                    format!("expected header {CANONICAL_HEADER:?}, found {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }

        let mut fields = line.split(',');
        let (t, function, count, duration) = match (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) {
            (Some(t), Some(f), Some(c), Some(d), None) => (t, f, c, d),
            _ => return Err(malformed(line_no, format!("expected 4 fields, found {line:?}"))),
        };

        let t = parse_u64(t, "t", line_no)?;
        let count = parse_u64(count, "count", line_no)?;
        let duration_ms = parse_u64(duration, "duration_ms", line_no)?;
        if count == 0 {
            return Err(malformed(line_no, "count must be at least 1"));
        }
        if duration_ms == 0 {
            return Err(malformed(line_no, "duration_ms must be at least 1"));
        }
        let function = function.trim();
        if function.is_empty()
            || !function
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            return Err(malformed(
                line_no,
                format!("function id {function:?} is not of the form [A-Za-z0-9_-]+"),
            ));
        }
        if let Some(horizon) = declared_horizon {
            if t >= horizon {
                return Err(malformed(
                    line_no,
                    format!("t={t} exceeds declared horizon_s={horizon}"),
                ));
            }
        }
        max_t = Some(max_t.map_or(t, |m: u64| m.max(t)));
        records.push(ArrivalRecord {
            t,
            function: FunctionId::new(function)?,
            count,
            duration_ms,
        });
    }

    let max_t = max_t.ok_or(TraceError::Empty)?;
    let horizon_s = declared_horizon.unwrap_or(max_t + 1);
    Ok(Trace::normalized(records, horizon_s))
}

fn parse_huawei<R: BufRead>(input: R, duration_ms: u64) -> Result<Trace, TraceError> {
    if duration_ms == 0 {
        return Err(TraceError::InvalidSpec {
            field: "duration_ms",
            message: "adapter duration must be at least 1 ms".to_string(),
        });
    }
    let mut lines = input.lines().enumerate();

    let functions: Vec<FunctionId> = loop {
        let (idx, line) = lines.next().ok_or(TraceError::Empty)?;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut columns = line.split(',');
        // First column is the second index; its name is not interpreted.
        columns.next().ok_or_else(|| malformed(idx + 1, "empty header"))?;
        let mut ids = Vec::new();
        for col in columns {
            ids.push(FunctionId::new(col)?);
        }
        if ids.is_empty() {
            return Err(malformed(idx + 1, "header declares no function columns"));
        }
        break ids;
    };

    let mut records = Vec::new();
    let mut origin: Option<u64> = None;
    let mut max_t = 0u64;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let raw_t = parse_u64(
            fields.next().ok_or_else(|| malformed(line_no, "missing time column"))?,
            "time",
            line_no,
        )?;
        let origin = *origin.get_or_insert(raw_t);
        let t = raw_t.checked_sub(origin).ok_or_else(|| {
            malformed(line_no, format!("timestamp {raw_t} precedes the first row ({origin})"))
        })?;
        max_t = max_t.max(t);
        for (j, field) in fields.enumerate() {
            if j >= functions.len() {
                return Err(malformed(line_no, "row has more columns than the header"));
            }
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let count = parse_u64(field, "count", line_no)?;
            if count == 0 {
                continue;
            }
            records.push(ArrivalRecord {
                t,
                function: functions[j].clone(),
                count,
                duration_ms,
            });
        }
    }

    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(Trace::normalized(records, max_t + 1))
}

/// Writes `trace` in canonical form. `parse_trace` of the output reproduces
/// the trace exactly.
pub fn emit_trace_csv<W: Write>(trace: &Trace, mut out: W) -> Result<(), TraceError> {
    for rec in &trace.records {
        if !rec.function.is_canonical() {
            return Err(TraceError::InvalidFunctionId(rec.function.as_str().to_string()));
        }
    }
    writeln!(out, "# horizon_s={}", trace.horizon_s)?;
    writeln!(out, "{CANONICAL_HEADER}")?;
    for rec in &trace.records {
        writeln!(out, "{},{},{},{}", rec.t, rec.function, rec.count, rec.duration_ms)?;
    }
    Ok(())
}
