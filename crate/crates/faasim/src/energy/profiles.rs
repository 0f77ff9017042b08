//! Built-in isolation profiles and the JSON profile file.
//!
//! The four defaults model measured reference hardware: a dual-socket x86
//! server booting single-vCPU µVMs at its most efficient concurrency, and a
//! small ARM single-board computer booting a minimal Linux per request. Every
//! measured constant lives here; nothing else in the crate hard-codes them.

use std::io::Read;

use serde::Deserialize;

use super::{EnergyError, IsolationProfile};
use crate::scalar::Scalar;

/// Energy per µVM start on the reference server (48 concurrent boots).
pub const UVM_START_ENERGY_J: f64 = 17.98;
/// Idle power per µVM worker: 120 W server idle over 48 virtual cores.
pub const UVM_IDLE_POWER_W: f64 = 2.5;
/// Energy per single-board-computer boot into a minimal Linux.
pub const SOC_START_ENERGY_J: f64 = 1.83;
/// Idle power of the single-board computer.
pub const SOC_IDLE_POWER_W: f64 = 0.6;

/// The four built-in profiles, in comparison order:
///
/// * `uvm`: µVM workers: per-start energy plus idle power for warm workers;
/// * `uvm_reserve`: as `uvm`, but idle power charged for all non-busy
///   capacity up to the fleet size (the overprovisioning upper bound);
/// * `soc`: one board boot per request, powered off otherwise;
/// * `soc_idle`: boards allowed to idle for warm reuse.
pub fn builtin_profiles<F: Scalar>() -> Vec<IsolationProfile<F>> {
    let p = |name: &str, start_j: f64, idle_w: f64, warm_pool, reserve_accounting| IsolationProfile {
        name: name.to_string(),
        start_energy_j: F::from_f64_lossy(start_j),
        idle_power_w: F::from_f64_lossy(idle_w),
        warm_pool,
        reserve_accounting,
    };
    vec![
        p("uvm", UVM_START_ENERGY_J, UVM_IDLE_POWER_W, true, false),
        p("uvm_reserve", UVM_START_ENERGY_J, UVM_IDLE_POWER_W, true, true),
        p("soc", SOC_START_ENERGY_J, 0.0, false, false),
        p("soc_idle", SOC_START_ENERGY_J, SOC_IDLE_POWER_W, true, false),
    ]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSpec {
    name: String,
    start_energy_j: f64,
    idle_power_w: f64,
    #[serde(default = "default_warm_pool")]
    warm_pool: bool,
    #[serde(default)]
    reserve_accounting: bool,
}

fn default_warm_pool() -> bool {
    true
}

/// Parses a JSON array of profile definitions.
///
/// Schema per element: `{"name", "start_energy_j", "idle_power_w",
/// "warm_pool" (default true), "reserve_accounting" (default false)}`.
/// Every profile is validated; duplicate names are rejected.
pub fn load_profiles<F: Scalar, R: Read>(input: R) -> Result<Vec<IsolationProfile<F>>, EnergyError> {
    let specs: Vec<ProfileSpec> = serde_json::from_reader(input)?;
    let mut profiles = Vec::with_capacity(specs.len());
    for spec in specs {
        let profile = IsolationProfile {
            name: spec.name,
            start_energy_j: F::from_f64_lossy(spec.start_energy_j),
            idle_power_w: F::from_f64_lossy(spec.idle_power_w),
            warm_pool: spec.warm_pool,
            reserve_accounting: spec.reserve_accounting,
        };
        profile.validate()?;
        if profiles.iter().any(|p: &IsolationProfile<F>| p.name == profile.name) {
            return Err(EnergyError::DuplicateProfile(profile.name));
        }
        profiles.push(profile);
    }
    Ok(profiles)
}

/// The effective profile set: the built-ins, with entries from an optional
/// definitions file replacing same-named built-ins and extending the list
/// otherwise. `None` yields exactly the four built-ins.
pub fn effective_profiles<F: Scalar, R: Read>(
    file: Option<R>,
) -> Result<Vec<IsolationProfile<F>>, EnergyError> {
    let mut profiles = builtin_profiles();
    let Some(file) = file else {
        return Ok(profiles);
    };
    for loaded in load_profiles(file)? {
        match profiles.iter_mut().find(|p| p.name == loaded.name) {
            Some(slot) => *slot = loaded,
            None => profiles.push(loaded),
        }
    }
    Ok(profiles)
}
