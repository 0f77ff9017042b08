//! Excess-energy accounting over simulation results.
//!
//! "Excess" is every joule not spent executing a function: the energy to
//! start worker sandboxes and the power drawn while workers (or reserved
//! fleet capacity) sit idle. Execution energy is excluded by assumption,
//! since a busy worker is counted as fully productive.
//!
//! An [`IsolationProfile`] prices one backend: joules per worker start and
//! watts per idle worker. [`excess_energy`] folds a profile over a
//! [`SimResult`] into a cumulative series. The module also computes
//! break-even idle times and integrates raw power-meter samples into
//! per-event joules.

mod power;
mod profiles;

pub use power::{integrate_power, read_power_csv, PowerSample};
pub use profiles::{
    builtin_profiles, effective_profiles, load_profiles, SOC_IDLE_POWER_W, SOC_START_ENERGY_J,
    UVM_IDLE_POWER_W, UVM_START_ENERGY_J,
};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::simcore::SimResult;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("profile {profile:?}: {field}: {message}")]
    InvalidProfile { profile: String, field: &'static str, message: String },
    #[error("duplicate profile name {0:?}")]
    DuplicateProfile(String),
    #[error("profile {0:?} accounts for reserve capacity but no capacity was provided")]
    MissingCapacity(String),
    #[error("capacity {capacity} is below the observed peak of {peak} workers")]
    CapacityBelowPeak { capacity: u64, peak: u64 },
    #[error("profile {0:?} has no idle power draw; break-even idle time is unbounded")]
    NoIdlePower(String),
    #[error("simulation result has an empty series")]
    EmptySeries,
    #[error("integration window [{t0}, {t1}] is invalid: {message}")]
    InvalidWindow { t0: f64, t1: f64, message: String },
    #[error("power samples do not cover the window: {0}")]
    Coverage(String),
    #[error("power sample timestamps are not strictly increasing at index {0}")]
    NonMonotone(usize),
    #[error("power samples line {line}: {message}")]
    MalformedSamples { line: usize, message: String },
    #[error("profiles file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Energy characteristics of one worker-isolation backend.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationProfile<F> {
    pub name: String,
    /// Joules charged per worker start.
    pub start_energy_j: F,
    /// Watts drawn per idle worker.
    pub idle_power_w: F,
    /// Whether workers can idle for reuse. Without a warm pool every request
    /// is a start and nothing ever idles, so no idle energy accrues.
    pub warm_pool: bool,
    /// Charge idle power for all non-busy capacity up to a fixed fleet size
    /// instead of only for idle workers (the overprovisioning upper bound).
    pub reserve_accounting: bool,
}

impl<F: Scalar> IsolationProfile<F> {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let invalid = |field: &'static str, message: String| EnergyError::InvalidProfile {
            profile: self.name.clone(),
            field,
            message,
        };
        if self.name.is_empty()
            || !self.name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            return Err(invalid("name", "must be non-empty and match [A-Za-z0-9_-]+".into()));
        }
        if !(self.start_energy_j >= F::zero()) {
            return Err(invalid("start_energy_j", format!("must be >= 0, got {}", self.start_energy_j)));
        }
        if !(self.idle_power_w >= F::zero()) {
            return Err(invalid("idle_power_w", format!("must be >= 0, got {}", self.idle_power_w)));
        }
        if !self.warm_pool && self.reserve_accounting {
            return Err(invalid(
                "reserve_accounting",
                "requires a warm pool (warm_pool = false implies reserve_accounting = false)".into(),
            ));
        }
        Ok(())
    }
}

/// Cumulative excess energy of one profile over a simulated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries<F> {
    pub profile: String,
    /// Cumulative excess joules at the end of each timestep; non-decreasing.
    pub cumulative_j: Vec<F>,
    /// Final cumulative value.
    pub total_j: F,
    /// `total_j / simulated wall time`.
    pub avg_excess_power_w: F,
}

/// Prices a simulation result under `profile`.
///
/// Per timestep `t` the excess increment is
/// `start_energy_j × starts(t) + idle_power_w × idle_base(t) × 1 s`, where
/// `starts(t)` is the cold starts for warm-pool profiles and all arrivals
/// otherwise, and `idle_base(t)` is the idle worker count (or
/// `capacity − busy(t)` under reserve accounting).
///
/// The series is computed as the profile rates times *running integer
/// totals*, so a pure-start profile is bit-for-bit `start_energy_j × (running
/// request count)` and scaling both rates scales the series exactly.
pub fn excess_energy<F: Scalar>(
    result: &SimResult,
    profile: &IsolationProfile<F>,
    capacity: Option<u64>,
) -> Result<EnergySeries<F>, EnergyError> {
    profile.validate()?;
    if result.series.is_empty() {
        return Err(EnergyError::EmptySeries);
    }
    let reserve_capacity = if profile.reserve_accounting {
        let capacity = capacity.ok_or_else(|| EnergyError::MissingCapacity(profile.name.clone()))?;
        let peak = result.totals.peak_total_workers;
        if capacity < peak {
            return Err(EnergyError::CapacityBelowPeak { capacity, peak });
        }
        Some(capacity)
    } else {
        None
    };

    let mut cumulative_j = Vec::with_capacity(result.series.len());
    let mut starts: u64 = 0;
    let mut idle_seconds: u64 = 0;
    for m in &result.series {
        starts += if profile.warm_pool { m.cold_starts } else { m.cold_starts + m.warm_starts };
        if profile.warm_pool {
            let idle_base = match reserve_capacity {
                Some(capacity) => capacity - m.busy,
                None => m.idle,
            };
            idle_seconds = idle_seconds.saturating_add(idle_base);
        }
        cumulative_j.push(
            profile.start_energy_j * F::from_count(starts)
                + profile.idle_power_w * F::from_count(idle_seconds),
        );
    }

    let total_j = *cumulative_j.last().expect("series is non-empty");
    let wall_time = F::from_count(result.series.len() as u64);
    Ok(EnergySeries {
        profile: profile.name.clone(),
        cumulative_j,
        total_j,
        avg_excess_power_w: total_j / wall_time,
    })
}

/// Idle duration beyond which keeping a worker warm costs more energy than
/// starting a fresh one: `start_energy_j / idle_power_w`.
///
/// Profiles with zero idle power have no break-even point (idling is free);
/// that is signalled as an error rather than a sentinel value.
pub fn break_even_idle<F: Scalar>(profile: &IsolationProfile<F>) -> Result<F, EnergyError> {
    if profile.idle_power_w <= F::zero() {
        return Err(EnergyError::NoIdlePower(profile.name.clone()));
    }
    Ok(profile.start_energy_j / profile.idle_power_w)
}
