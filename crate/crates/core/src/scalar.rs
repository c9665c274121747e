//! Numeric traits the rest of the crate is written against.
//!
//! Two tiers exist. [`Field`] is the minimal arithmetic needed to evaluate
//! polynomial recurrences; it is satisfied by `f32`, `f64` and exact
//! rationals such as `num_rational::Ratio<i64>`, which lets the Gegenbauer
//! coefficients be checked without rounding. [`Scalar`] adds everything
//! the floating-point kernels need (square roots, exponentials, finiteness
//! checks) and is only implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field arithmetic with integer embedding.
pub trait Field: Clone + Num + Neg<Output = Self> + PartialOrd + Debug {
    fn from_int(v: i64) -> Self;

    /// `num / den` computed in the field.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl<T> Field for T
where
    T: Clone + Num + Neg<Output = T> + PartialOrd + Debug + FromPrimitive,
{
    fn from_int(v: i64) -> Self {
        T::from_i64(v).expect("integer not representable in field")
    }
}

/// Real floating-point scalar used by the sparse kernels, solvers and model.
pub trait Scalar:
    Float
    + Field
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for hyperparameters and constants.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
