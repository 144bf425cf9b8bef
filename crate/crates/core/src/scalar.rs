//! Scalar abstraction: the whole lab is generic over one floating type.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating scalar the lab computes with: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + 'static {}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
}

/// Shorthand for embedding an `f64` literal into the working scalar type.
#[inline]
pub fn lit<S: Real>(v: f64) -> S {
    S::from_f64(v).expect("literal representable in scalar type")
}

/// `x/y` guarding against 0/0 (returns 0 there).
#[inline]
pub fn safe_div<S: Real>(x: S, y: S) -> S {
    if x.is_zero() && y.is_zero() {
        S::zero()
    } else {
        x / y
    }
}
