//! Discrete-event simulation and energy accounting for serverless worker fleets.
//!
//! `faasim` replays per-second function invocation traces through per-function
//! worker pools with warm/cold start semantics and configurable keep-alive
//! eviction, then prices the resulting occupancy under pluggable isolation
//! profiles (start energy per worker, idle power draw) to compare the excess,
//! non-productive, energy of different isolation backends.
//!
//! The crate is organized around four stages:
//!
//! * [`trace`]: ingest, validate, summarize, and synthesize invocation traces;
//! * [`simcore`]: replay a trace into per-timestep busy/idle/cold-start counts;
//! * [`energy`]: turn occupancy counts into cumulative excess-energy series,
//!   compute break-even idle times, and integrate raw power-meter samples;
//! * [`report`]: cross-profile comparisons, linear power extrapolation, and
//!   plot-ready CSV/JSON emission.
//!
//! Occupancy is counted in integers; all energy math is generic over a
//! floating-point [`Scalar`] so the same formulas run in `f32` or `f64`.
//! The aliases at the crate root fix `f64`, which is what the `faasim` CLI
//! uses throughout.

// Negated float comparisons like `!(t0 < t1)` are deliberate throughout:
// they reject NaN along with the out-of-range case.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod report;
mod scalar;
pub mod simcore;
pub mod trace;

pub use scalar::Scalar;
pub use simcore::{simulate, KeepAlivePolicy, SimConfig, SimResult, TimestepMetrics};
pub use trace::{ArrivalRecord, FunctionId, Trace, TraceStats};

/// [`energy::IsolationProfile`] over `f64`.
pub type IsolationProfile = energy::IsolationProfile<f64>;
/// [`energy::EnergySeries`] over `f64`.
pub type EnergySeries = energy::EnergySeries<f64>;
/// [`energy::PowerSample`] over `f64`.
pub type PowerSample = energy::PowerSample<f64>;
/// [`report::ComparisonSummary`] over `f64`.
pub type ComparisonSummary = report::ComparisonSummary<f64>;
/// [`report::Extrapolation`] over `f64`.
pub type Extrapolation = report::Extrapolation<f64>;
