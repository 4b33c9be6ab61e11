//! Scalar abstraction shared by the geometry and probability code.

use num_traits::{FromPrimitive, Num, Signed};
use std::fmt;
use std::ops;

/// Number type usable for coordinates and probabilities.
///
/// Implemented by `f32`, `f64` and [`crate::Rational`].  Exactness is a
/// property of the concrete type, not of the trait: the crossing predicate and
/// the enumeration in [`crate::probability`] are only certified when run on
/// rationals, floats are for quick estimates.
pub trait Scalar:
    Clone
    + Num
    + Signed
    + FromPrimitive
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + ops::AddAssign
    + ops::SubAssign
    + ops::MulAssign
{
    /// Exact ratio of two unsigned integers.
    fn from_ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).unwrap() / Self::from_u64(den).unwrap()
    }
}

impl<T> Scalar for T where
    T: Clone
        + Num
        + Signed
        + FromPrimitive
        + PartialOrd
        + fmt::Debug
        + fmt::Display
        + ops::AddAssign
        + ops::SubAssign
        + ops::MulAssign
{
}
