//! Separated functions `u(r,θ) = f(r)·a(θ)` on a conical end.

use crate::error::{Error, Result};
use crate::geometry::WeaklyConicalEnd;
use crate::link::LinkMode;
use crate::operators::DriftOperator;
use crate::profile::RadialProfile;
use crate::scalar::Real;
use std::rc::Rc;

/// Asserted almost-eigenfunction context `(operator, λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenContext<S> {
    pub operator: DriftOperator<S>,
    pub lambda: S,
}

/// `u = f(r) a(θ)` with the link factor reduced to its mode constants.
#[derive(Clone, Debug)]
pub struct SeparatedFunction<S> {
    pub end: Rc<WeaklyConicalEnd<S>>,
    pub mode: LinkMode<S>,
    pub profile: RadialProfile<S>,
    pub context: Option<EigenContext<S>>,
}

impl<S: Real> SeparatedFunction<S> {
    pub fn new(end: Rc<WeaklyConicalEnd<S>>, mode: LinkMode<S>, profile: RadialProfile<S>) -> Self {
        Self { end, mode, profile, context: None }
    }

    pub fn with_context(mut self, op: DriftOperator<S>, lambda: S) -> Self {
        self.context = Some(EigenContext { operator: op, lambda });
        self
    }

    /// Radial range where both the profile and the end are defined.
    pub fn domain(&self) -> (S, S) {
        let (p_lo, p_hi) = self.profile.domain();
        (p_lo.max(self.end.r_inner), p_hi)
    }

    pub fn context(&self) -> Result<EigenContext<S>> {
        self.context
            .ok_or_else(|| Error::Precondition("function carries no eigen-context".into()))
    }
}
