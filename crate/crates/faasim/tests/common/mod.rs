//! Shared helpers for integration tests.

pub mod oracle;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use faasim::trace::{ArrivalRecord, FunctionId, Trace};

/// Small random trace: up to `max_functions` functions, horizon up to
/// `max_horizon_s`, at most `max_arrivals_per_s` total arrivals per second,
/// durations up to `max_duration_ms`.
pub fn random_trace(
    rng: &mut ChaCha8Rng,
    max_functions: usize,
    max_horizon_s: u64,
    max_arrivals_per_s: u64,
    max_duration_ms: u64,
) -> Trace {
    let functions = rng.random_range(1..=max_functions);
    let horizon_s = rng.random_range(10..=max_horizon_s);
    let ids: Vec<FunctionId> = (0..functions)
        .map(|i| FunctionId::new(&format!("f{i}")).unwrap())
        .collect();
    let mut records = Vec::new();
    for t in 0..horizon_s {
        let arrivals = rng.random_range(0..=max_arrivals_per_s);
        for _ in 0..arrivals {
            records.push(ArrivalRecord {
                t,
                function: ids[rng.random_range(0..functions)].clone(),
                count: 1,
                duration_ms: rng.random_range(1..=max_duration_ms),
            });
        }
    }
    Trace::normalized(records, horizon_s)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
