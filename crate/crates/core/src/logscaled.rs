//! Numbers carried as `mantissa * exp(log_scale)`.
//!
//! The weighted functionals pair quantities like `Φ_m(ρ) ≈ e^{-ρ²/4}` with
//! ordinary-sized factors; beyond ρ ≈ 55 the product underflows f64 while
//! every ratio of interest stays O(1). Keeping the exponential part as a
//! separate log offset makes products, ratios and sums exact over the whole
//! radial range used by the lab.

use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScaled<S> {
    /// Finite, sign-carrying part.
    pub mantissa: S,
    /// Additive log offset; the represented value is `mantissa * exp(log_scale)`.
    pub log_scale: S,
}

impl<S: Real> LogScaled<S> {
    pub fn new(mantissa: S, log_scale: S) -> Self {
        Self { mantissa, log_scale }
    }

    pub fn zero() -> Self {
        Self { mantissa: S::zero(), log_scale: S::zero() }
    }

    pub fn from_value(v: S) -> Self {
        Self { mantissa: v, log_scale: S::zero() }
    }

    /// Collapse to a plain scalar; under/overflow rounds to 0/±∞.
    pub fn value(&self) -> S {
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`; `-∞` for zero mantissa.
    pub fn log_abs(&self) -> S {
        self.mantissa.abs().ln() + self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self { mantissa: self.mantissa.abs(), log_scale: self.log_scale }
    }

    pub fn neg(&self) -> Self {
        Self { mantissa: -self.mantissa, log_scale: self.log_scale }
    }

    pub fn scale(&self, c: S) -> Self {
        Self { mantissa: self.mantissa * c, log_scale: self.log_scale }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mantissa: self.mantissa * other.mantissa,
            log_scale: self.log_scale + other.log_scale,
        }
    }

    /// Scalar ratio `self / other`; exact cancellation of the log offsets.
    pub fn ratio(&self, other: &Self) -> S {
        let shift = (self.log_scale - other.log_scale).exp();
        self.mantissa / other.mantissa * shift
    }

    /// Sum; the result is anchored at the larger log offset so the mantissa
    /// never overflows from the rescaling itself.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.log_scale >= other.log_scale {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (lo.log_scale - hi.log_scale).exp();
        Self {
            mantissa: hi.mantissa + lo.mantissa * shift,
            log_scale: hi.log_scale,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Renormalize so the mantissa lands in [1, 2) in magnitude.
    pub fn normalized(&self) -> Self {
        if self.mantissa.is_zero() || !self.mantissa.is_finite() {
            return *self;
        }
        let l = self.mantissa.abs().ln();
        Self {
            mantissa: self.mantissa * (-l).exp(),
            log_scale: self.log_scale + l,
        }
    }
}
