//! Cross-profile comparison, linear extrapolation, and artifact emission.
//!
//! Internally everything is joules; kilowatt-hours are derived at emission
//! time only, through the single [`JOULES_PER_KWH`] constant. Reductions are
//! fractions (0.9063, not 90.63 %) and are rounded to four decimals in the
//! JSON document. All emitters are deterministic functions of their inputs.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergySeries;
use crate::scalar::Scalar;

pub const JOULES_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("baseline profile {0:?} is not among the compared series")]
    UnknownBaseline(String),
    #[error("no energy series to compare")]
    EmptySeriesList,
    #[error("series {profile:?} has {found} timesteps, expected {expected}")]
    MismatchedLengths { profile: String, expected: usize, found: usize },
    #[error("wall time must be positive, got {0}")]
    NonPositiveWallTime(f64),
    #[error("baseline total is zero; reductions are undefined")]
    ZeroBaseline,
    #[error("base request rate must be positive, got {0}")]
    NonPositiveBaseRate(f64),
    #[error("target request rate must be non-negative, got {0}")]
    NegativeTargetRate(f64),
    #[error("profile name {0:?} cannot appear in a CSV header; use [A-Za-z0-9_-]+")]
    UnsafeProfileName(String),
    #[error("energy csv line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One profile's totals relative to the comparison baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow<F> {
    pub profile: String,
    pub total_j: F,
    pub total_kwh: F,
    /// `1 − total_j / baseline_total_j`; 0 for the baseline itself, negative
    /// for profiles that use more energy than the baseline.
    pub reduction_vs_baseline: F,
    pub avg_excess_power_w: F,
}

/// Cross-profile comparison over one simulated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary<F> {
    pub baseline: String,
    /// Simulated duration in seconds.
    pub wall_time_s: F,
    pub rows: Vec<ProfileRow<F>>,
}

/// Compares energy series against the named baseline. Rows keep input order.
pub fn compare<F: Scalar>(
    series: &[EnergySeries<F>],
    baseline: &str,
    wall_time_s: F,
) -> Result<ComparisonSummary<F>, ReportError> {
    if series.is_empty() {
        return Err(ReportError::EmptySeriesList);
    }
    if !(wall_time_s > F::zero()) {
        return Err(ReportError::NonPositiveWallTime(wall_time_s.to_f64().unwrap_or(f64::NAN)));
    }
    let baseline_total = series
        .iter()
        .find(|s| s.profile == baseline)
        .ok_or_else(|| ReportError::UnknownBaseline(baseline.to_string()))?
        .total_j;

    let mut rows = Vec::with_capacity(series.len());
    for s in series {
        let reduction = if s.total_j == baseline_total {
            F::zero()
        } else if baseline_total == F::zero() {
            return Err(ReportError::ZeroBaseline);
        } else {
            F::one() - s.total_j / baseline_total
        };
        rows.push(ProfileRow {
            profile: s.profile.clone(),
            total_j: s.total_j,
            total_kwh: s.total_j / F::from_f64_lossy(JOULES_PER_KWH),
            reduction_vs_baseline: reduction,
            avg_excess_power_w: s.total_j / wall_time_s,
        });
    }
    Ok(ComparisonSummary { baseline: baseline.to_string(), wall_time_s, rows })
}

/// Linear scaling of a power delta from one request rate to another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation<F> {
    pub base_rps: F,
    pub target_rps: F,
    pub base_power_delta_w: F,
    /// `base_power_delta_w × target_rps / base_rps`.
    pub scaled_power_delta_w: F,
}

pub fn extrapolate_power<F: Scalar>(
    base_power_delta_w: F,
    base_rps: F,
    target_rps: F,
) -> Result<Extrapolation<F>, ReportError> {
    if !(base_rps > F::zero()) {
        return Err(ReportError::NonPositiveBaseRate(base_rps.to_f64().unwrap_or(f64::NAN)));
    }
    if target_rps < F::zero() {
        return Err(ReportError::NegativeTargetRate(target_rps.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(Extrapolation {
        base_rps,
        target_rps,
        base_power_delta_w,
        scaled_power_delta_w: base_power_delta_w * target_rps / base_rps,
    })
}

fn csv_safe(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Writes the cumulative series of all profiles as one plot-ready CSV:
/// header `t,<profile>_cum_j,...`, one row per timestep, columns in input
/// order.
pub fn write_energy_csv<F: Scalar, W: Write>(
    series: &[EnergySeries<F>],
    mut out: W,
) -> Result<(), ReportError> {
    let first = series.first().ok_or(ReportError::EmptySeriesList)?;
    let steps = first.cumulative_j.len();
    for s in series {
        if !csv_safe(&s.profile) {
            return Err(ReportError::UnsafeProfileName(s.profile.clone()));
        }
        if s.cumulative_j.len() != steps {
            return Err(ReportError::MismatchedLengths {
                profile: s.profile.clone(),
                expected: steps,
                found: s.cumulative_j.len(),
            });
        }
    }
    write!(out, "t")?;
    for s in series {
        write!(out, ",{}_cum_j", s.profile)?;
    }
    writeln!(out)?;
    for t in 0..steps {
        write!(out, "{t}")?;
        for s in series {
            write!(out, ",{}", s.cumulative_j[t])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads an energy CSV back into `(profile, cumulative joules)` columns.
pub fn read_energy_csv<R: BufRead>(input: R) -> Result<Vec<(String, Vec<f64>)>, ReportError> {
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut saw_header = false;
    let mut rows = 0usize;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            let mut fields = line.split(',');
            if fields.next() != Some("t") {
                return Err(ReportError::MalformedCsv {
                    line: line_no,
                    message: "header must start with \"t\"".to_string(),
                });
            }
            for field in fields {
                let name = field.strip_suffix("_cum_j").ok_or_else(|| ReportError::MalformedCsv {
                    line: line_no,
                    message: format!("column {field:?} does not end in _cum_j"),
                })?;
                columns.push((name.to_string(), Vec::new()));
            }
            if columns.is_empty() {
                return Err(ReportError::MalformedCsv {
                    line: line_no,
                    message: "no profile columns".to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let t: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| ReportError::MalformedCsv {
                line: line_no,
                message: "bad timestep index".to_string(),
            })?;
        if t != rows {
            return Err(ReportError::MalformedCsv {
                line: line_no,
                message: format!("expected t={rows}, found t={t}"),
            });
        }
        for (col, field) in columns.iter_mut().zip(fields) {
            let value: f64 = field.parse().map_err(|_| ReportError::MalformedCsv {
                line: line_no,
                message: format!("{field:?} is not a number"),
            })?;
            col.1.push(value);
        }
        rows += 1;
    }
    if !saw_header || rows == 0 {
        return Err(ReportError::MalformedCsv { line: 0, message: "empty energy csv".to_string() });
    }
    for col in &columns {
        if col.1.len() != rows {
            return Err(ReportError::MalformedCsv {
                line: 0,
                message: format!("column {} has {} values for {} rows", col.0, col.1.len(), rows),
            });
        }
    }
    Ok(columns)
}

/// JSON form of a comparison summary, with stable field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub baseline: String,
    pub wall_time_s: f64,
    pub rows: Vec<SummaryRow>,
    pub extrapolations: Vec<SummaryExtrapolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub profile: String,
    pub total_j: f64,
    pub total_kwh: f64,
    /// Fraction rounded to four decimals.
    pub reduction_vs_baseline: f64,
    pub avg_excess_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryExtrapolation {
    pub profile: String,
    pub base_rps: f64,
    pub target_rps: f64,
    pub base_power_delta_w: f64,
    pub scaled_power_delta_w: f64,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Builds the JSON document for a summary plus labelled extrapolations.
pub fn summary_doc<F: Scalar>(
    summary: &ComparisonSummary<F>,
    extrapolations: &[(String, Extrapolation<F>)],
) -> SummaryDoc {
    let f = |x: F| x.to_f64().expect("scalar converts to f64");
    SummaryDoc {
        baseline: summary.baseline.clone(),
        wall_time_s: f(summary.wall_time_s),
        rows: summary
            .rows
            .iter()
            .map(|r| SummaryRow {
                profile: r.profile.clone(),
                total_j: f(r.total_j),
                total_kwh: f(r.total_kwh),
                reduction_vs_baseline: round4(f(r.reduction_vs_baseline)),
                avg_excess_power_w: f(r.avg_excess_power_w),
            })
            .collect(),
        extrapolations: extrapolations
            .iter()
            .map(|(profile, e)| SummaryExtrapolation {
                profile: profile.clone(),
                base_rps: f(e.base_rps),
                target_rps: f(e.target_rps),
                base_power_delta_w: f(e.base_power_delta_w),
                scaled_power_delta_w: f(e.scaled_power_delta_w),
            })
            .collect(),
    }
}

/// Serializes a summary document; byte-identical for identical documents.
pub fn write_summary_json<W: Write>(doc: &SummaryDoc, mut out: W) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_summary_json<R: Read>(input: R) -> Result<SummaryDoc, ReportError> {
    Ok(serde_json::from_reader(input)?)
}
