//! Scalar abstraction for probability arithmetic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type usable for beliefs and table entries.
///
/// The sum tolerance is the absolute slack allowed when checking that a
/// probability vector sums to one.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Absolute tolerance for "sums to one" checks.
    fn sum_tolerance() -> Self;

    /// Lossy conversion from `f64`, used for literal constants.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count fits in scalar")
    }
}

impl Scalar for f64 {
    fn sum_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn sum_tolerance() -> Self {
        1e-5
    }
}
