//! Numeric abstraction for the distribution and hitting-probability code.
//!
//! The exact recursions only need field arithmetic, an absolute value and
//! an ordering, so they run unchanged over `f32`, `f64` and exact rationals.
//! Sampling and geometry always go through `f64`.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// A real-like scalar: `f32`, `f64`, or an exact rational.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync
{
    /// Allowed deviation of a probability vector's sum from one.
    fn simplex_tolerance() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    /// Lossy view used by samplers and reports.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn simplex_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn simplex_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    fn simplex_tolerance() -> Self {
        BigRational::zero()
    }
}

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Sum of a slice in order.
pub fn sum<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc + v.clone())
}

/// Total-variation distance `½ Σ |p - q|`.
pub fn total_variation<T: Scalar>(p: &[T], q: &[T]) -> T {
    debug_assert_eq!(p.len(), q.len());
    let l1 = p
        .iter()
        .zip(q)
        .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    l1 / T::from_count(2)
}
