//! Eigenfunction transformations: multiplication by `r^{2μ}`, `Φ_μ`, `Ψ_μ`
//! with the induced change of operator and eigenvalue.
//!
//! The multiplier lives entirely in the profile's log factor, so the
//! composition `Ψ_μ ∘ Φ_μ` reproduces the `r^{2μ}` transformation with
//! coefficient-exact cancellation of the `e^{±r²/4}` parts.

use crate::error::{Error, Result};
use crate::operators::{DriftOperator, DriftSign};
use crate::profile::LogFactor;
use crate::scalar::{lit, Real};
use crate::separated::{EigenContext, SeparatedFunction};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind<S> {
    /// `û = r^{2μ} u`
    Power { mu: S },
    /// `û = Φ_μ u`; maps minus-drift contexts to plus-drift ones.
    GaussTwist { mu: S },
    /// `û = Ψ_μ u`; maps plus-drift contexts to minus-drift ones.
    InverseGaussTwist { mu: S },
}

/// Transform `u`, rewriting its eigen-context:
///
/// * power:  `(L_m + λ)  → (L_{m-4μ} + λ+μ)` (mirrored for plus-drift),
/// * Φ-twist: `(L_m + λ)  → (L⁺_{m-2μ} + ½(n+m+2λ−μ))`,
/// * Ψ-twist: `(L⁺_m + λ) → (L_{m-2μ} + ½(−n−m+2λ+μ))`.
pub fn transform<S: Real>(
    u: &SeparatedFunction<S>,
    kind: TransformKind<S>,
) -> Result<SeparatedFunction<S>> {
    let ctx = u.context()?;
    let n = lit::<S>(u.end.n as f64);
    let m = ctx.operator.m;
    let lambda = ctx.lambda;
    let two = lit::<S>(2.0);
    let four = lit::<S>(4.0);
    let half = lit::<S>(0.5);

    let (factor, new_ctx) = match kind {
        TransformKind::Power { mu } => {
            let new_lambda = match ctx.operator.sign {
                DriftSign::Minus => lambda + mu,
                DriftSign::Plus => lambda - mu,
            };
            (
                LogFactor::power(two * mu),
                EigenContext {
                    operator: DriftOperator { sign: ctx.operator.sign, m: m - four * mu },
                    lambda: new_lambda,
                },
            )
        }
        TransformKind::GaussTwist { mu } => {
            if ctx.operator.sign != DriftSign::Minus {
                return Err(Error::Precondition(
                    "gauss twist expects a minus-drift context".into(),
                ));
            }
            (
                LogFactor::gaussian(mu),
                EigenContext {
                    operator: DriftOperator::plus(m - two * mu),
                    lambda: half * (n + m + two * lambda - mu),
                },
            )
        }
        TransformKind::InverseGaussTwist { mu } => {
            if ctx.operator.sign != DriftSign::Plus {
                return Err(Error::Precondition(
                    "inverse gauss twist expects a plus-drift context".into(),
                ));
            }
            (
                LogFactor::inverse_gaussian(mu),
                EigenContext {
                    operator: DriftOperator::minus(m - two * mu),
                    lambda: half * (-n - m + two * lambda + mu),
                },
            )
        }
    };

    Ok(SeparatedFunction {
        end: u.end.clone(),
        mode: u.mode,
        profile: u.profile.clone().with_log_factor(factor),
        context: Some(new_ctx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exact_cone;
    use crate::operators::{certify_almost_eigen, ResidualConvention};
    use crate::profile::{ClosedTerm, RadialProfile};
    use std::rc::Rc;

    fn linear_eigenfunction(n: usize) -> SeparatedFunction<f64> {
        // (L_0 + 1/2) r = (n-1)/r: almost eigenfunction with lambda = 1/2
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile = RadialProfile::closed(vec![ClosedTerm::power(1.0, 1.0)], (1.0, 100.0));
        SeparatedFunction::new(end, mode, profile).with_context(DriftOperator::minus(0.0), 0.5)
    }

    #[test]
    fn power_roundtrip_is_identity() {
        let u = linear_eigenfunction(3);
        let fwd = transform(&u, TransformKind::Power { mu: 0.75 }).unwrap();
        let back = transform(&fwd, TransformKind::Power { mu: -0.75 }).unwrap();
        assert_eq!(back.profile.log_factor, u.profile.log_factor);
        assert_eq!(back.context.unwrap(), u.context.unwrap());
        for &r in &[2.0, 17.0, 60.0] {
            let a = back.profile.value_jet(r).unwrap();
            let b = u.profile.value_jet(r).unwrap();
            assert_eq!(a.f, b.f);
            assert_eq!(a.df, b.df);
        }
    }

    #[test]
    fn twist_composition_equals_power_exactly() {
        let u = linear_eigenfunction(3);
        let mu = 0.5;
        let twisted = transform(&u, TransformKind::GaussTwist { mu }).unwrap();
        let composed = transform(&twisted, TransformKind::InverseGaussTwist { mu }).unwrap();
        let powered = transform(&u, TransformKind::Power { mu }).unwrap();
        // coefficient-exact equality of the multiplier and the context
        assert_eq!(composed.profile.log_factor, powered.profile.log_factor);
        let c = composed.context.unwrap();
        let p = powered.context.unwrap();
        assert_eq!(c.operator.sign, p.operator.sign);
        assert_eq!(c.operator.m, p.operator.m);
        assert_eq!(c.lambda, p.lambda);
    }

    #[test]
    fn power_transform_recertifies() {
        // u = r with lambda = 1/2; r^{2mu} u is an almost eigenfunction of
        // L_{-4mu} with eigenvalue 1/2 + mu
        let u = linear_eigenfunction(3);
        let hat = transform(&u, TransformKind::Power { mu: 1.0 }).unwrap();
        let ctx = hat.context.unwrap();
        assert_eq!(ctx.operator.m, -4.0);
        assert_eq!(ctx.lambda, 1.5);
        let cert = certify_almost_eigen(
            &hat,
            &ctx.operator,
            ctx.lambda,
            (10.0, 60.0),
            ResidualConvention::STANDARD,
            64,
        )
        .unwrap();
        assert!(cert.passed && cert.m_constant.is_finite());
        // (L_{-4} + 3/2) r^3 = (3n-3) r exactly: ratio -> (3n-3)/ (1 + 3/r)-ish
        assert!(cert.m_constant < 3.0 * (3.0 - 1.0) + 1.0);
    }

    #[test]
    fn twists_enforce_drift_sign() {
        let u = linear_eigenfunction(2);
        assert!(transform(&u, TransformKind::InverseGaussTwist { mu: 1.0 }).is_err());
        let t = transform(&u, TransformKind::GaussTwist { mu: 1.0 }).unwrap();
        assert!(transform(&t, TransformKind::GaussTwist { mu: 1.0 }).is_err());
    }
}
