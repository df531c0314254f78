//! Scalar abstractions.
//!
//! Curve fitting only needs field arithmetic, so it is written against
//! [`Field`] and also runs on exact types such as big rationals. Everything
//! that needs square roots or trigonometry is written against [`Real`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Ordered field: enough for polynomial arithmetic and least squares.
pub trait Field:
    Clone
    + PartialOrd
    + Debug
    + Num
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Field for T where
    T: Clone
        + PartialOrd
        + Debug
        + Num
        + Neg<Output = T>
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Field + Float + FloatConst + Copy + Display + Default {}

impl<T> Real for T where T: Field + Float + FloatConst + Copy + Display + Default {}

/// Converts an `f64` literal into `T`.
///
/// Panics only if `T` cannot represent finite `f64` values, which no
/// supported scalar does.
#[inline]
pub fn lit<T: Field>(v: f64) -> T {
    T::from_f64(v).expect("scalar type cannot represent f64 literal")
}

/// True when `v` is neither NaN nor infinite. Works for exact types too,
/// where it is always true.
#[inline]
pub fn is_finite_value<T: Field>(v: &T) -> bool {
    let d = v.clone() - v.clone();
    d == T::zero()
}

/// Absolute value for any [`Field`].
#[inline]
pub fn abs_value<T: Field>(v: &T) -> T {
    if *v < T::zero() {
        -v.clone()
    } else {
        v.clone()
    }
}

#[inline]
pub(crate) fn from_usize<T: Field>(v: usize) -> T {
    T::from_usize(v).expect("scalar type cannot represent usize")
}

/// Wraps an angle in radians into (-pi, pi].
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = a % two_pi;
    if r > T::PI() {
        r = r - two_pi;
    } else if r <= -T::PI() {
        r = r + two_pi;
    }
    r
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_degrees<T: Real>(a: T) -> T {
    let full = lit::<T>(360.0);
    let half = lit::<T>(180.0);
    let mut r = a % full;
    if r > half {
        r = r - full;
    } else if r <= -half {
        r = r + full;
    }
    r
}

/// Sum with a fixed pairwise reduction tree, so the result depends only on
/// the order of `values` and not on how callers batch them.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n if n <= 8 => values.iter().fold(T::zero(), |a, &b| a + b),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
