use std::fmt;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used by all energy and reporting math.
///
/// Worker occupancy is tracked in integer counts; everything measured in
/// joules, watts, or seconds-as-fractions goes through this trait so the
/// arithmetic is identical for `f32` and `f64`. The crate-root aliases
/// instantiate `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Converts an occupancy count. Exact for every count a simulation can
    /// produce in `f64`; rounds to nearest above the mantissa in `f32`.
    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("u64 converts to a float scalar")
    }

    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to a float scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
