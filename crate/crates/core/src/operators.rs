//! The drift operators `L_m = Δ_g − (r/2)∂_r + (m/r)∂_r` and
//! `L_m⁺ = Δ_g + (r/2)∂_r + (m/r)∂_r`, and almost-eigenfunction
//! certification.
//!
//! On a separated function the operator acts radially; the link factor
//! enters through the mode eigenvalue and the model's `1/h` scale. All
//! residual ratios are computed on the reduced profile (explicit
//! exponential factors cancelled), so certification works where direct
//! values under- or overflow.

use crate::error::{Error, Result};
use crate::fitting;
use crate::scalar::{lit, safe_div, Real};
use crate::separated::SeparatedFunction;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftSign {
    /// `−(r/2)∂_r`, self-adjoint for `Φ_m`.
    Minus,
    /// `+(r/2)∂_r`, self-adjoint for `Ψ_m`.
    Plus,
}

impl DriftSign {
    pub fn factor<S: Real>(&self) -> S {
        match self {
            DriftSign::Minus => -S::one(),
            DriftSign::Plus => S::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftOperator<S> {
    pub sign: DriftSign,
    pub m: S,
}

impl<S: Real> DriftOperator<S> {
    pub fn minus(m: S) -> Self {
        Self { sign: DriftSign::Minus, m }
    }

    pub fn plus(m: S) -> Self {
        Self { sign: DriftSign::Plus, m }
    }

    /// First-order drift coefficient `m/r ± r/2` (multiplies `∂_r u`).
    pub fn drift_coeff(&self, r: S) -> S {
        self.m / r + self.sign.factor::<S>() * r * lit(0.5)
    }
}

/// Residual weight `r^p (|u| + r^q |∇u|)` used in certification; the three
/// shapes in use are [`ResidualConvention::STANDARD`],
/// [`ResidualConvention::COARSE`] and [`ResidualConvention::EXPANDER`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualConvention {
    pub radial_power: i32,
    pub grad_power: i32,
}

impl ResidualConvention {
    /// `r^{-2}(|u| + |∇u|)`
    pub const STANDARD: Self = Self { radial_power: -2, grad_power: 0 };
    /// `r^{-1}(|u| + |∇u|)`
    pub const COARSE: Self = Self { radial_power: -1, grad_power: 0 };
    /// `r^{-2}(|u| + r^{-1}|∇u|)`
    pub const EXPANDER: Self = Self { radial_power: -2, grad_power: -1 };
    /// `r^{-1}(|u| + r^{-1}|∇u|)`, the twisted-plus output shape.
    pub const TWISTED: Self = Self { radial_power: -1, grad_power: -1 };

    pub fn weight<S: Real>(&self, r: S, abs_u: S, abs_grad: S) -> S {
        r.powi(self.radial_power) * (abs_u + r.powi(self.grad_power) * abs_grad)
    }
}

/// Reduced pointwise data for residual ratios: all entries share the
/// cancelled factor `e^{ℓ(r)}` of the profile.
pub(crate) struct ReducedPoint<S> {
    /// `(L + λ)f` per unit `a`, reduced.
    pub(crate) op_value: S,
    /// `|f|`, reduced.
    pub(crate) abs_u: S,
    /// Folded `|∇u|` per unit `a`, reduced.
    pub(crate) abs_grad: S,
    /// Reduced `f` with sign.
    pub(crate) f: S,
    /// Reduced full derivative `F' + ℓ'F`.
    pub(crate) df: S,
}

pub(crate) fn reduced_point<S: Real>(
    u: &SeparatedFunction<S>,
    op: &DriftOperator<S>,
    lambda: S,
    r: S,
) -> Result<ReducedPoint<S>> {
    let end = &u.end;
    let (c2, c1) = end.laplace_coeffs(r)?;
    let g = end.grad_r(r)?;
    let ls = end.link_scale(r)?;
    let mu = u.mode.eigenvalue;
    let jet = u.profile.reduced_jet(r)?;
    let (_, dl, d2l) = u.profile.log_factor.jet(r);
    let two = lit::<S>(2.0);

    // conjugated second/first derivatives of f = F e^l
    let f0 = jet.f;
    let f1 = jet.df + dl * f0;
    let f2 = jet.d2f + two * dl * jet.df + (d2l + dl * dl) * f0;

    let drift = op.drift_coeff(r) * g * g;
    let op_value = c2 * f2 + (c1 + drift) * f1 + (lambda - mu * ls) * f0;
    let abs_grad = (f1 * f1 * g * g + f0 * f0 * mu * ls).sqrt();
    Ok(ReducedPoint { op_value, abs_u: f0.abs(), abs_grad, f: f0, df: f1 })
}

/// `(L u)(r, ·)` per unit `a(θ)`; true value, may saturate where the
/// profile's exponential factor leaves the floating range.
pub fn apply_operator<S: Real>(
    u: &SeparatedFunction<S>,
    op: &DriftOperator<S>,
    r: S,
) -> Result<S> {
    let p = reduced_point(u, op, S::zero(), r)?;
    let (l, _, _) = u.profile.log_factor.jet(r);
    Ok(p.op_value * l.exp())
}

/// `((L + λ) u)(r, ·)` per unit `a(θ)`.
pub fn apply_shifted<S: Real>(
    u: &SeparatedFunction<S>,
    op: &DriftOperator<S>,
    lambda: S,
    r: S,
) -> Result<S> {
    let p = reduced_point(u, op, lambda, r)?;
    let (l, _, _) = u.profile.log_factor.jet(r);
    Ok(p.op_value * l.exp())
}

/// Certificate for `|(L + λ)u| ≤ M · weight(r, |u|, |∇u|)`.
#[derive(Clone, Debug, Serialize)]
pub struct AlmostEigenCertificate<S> {
    pub m_constant: S,
    pub lambda: S,
    pub convention: ResidualConvention,
    pub region: (S, S),
    /// Sampled `(r, residual ratio)`.
    pub residuals: Vec<(S, S)>,
    /// Log-log slope of the ratio over the outer half of the region.
    pub growth_exponent: S,
    pub passed: bool,
}

/// Measure the minimal `M` on a geometric grid over `region`.
///
/// Fails when the residual ratio grows with `r` (positive log-log slope
/// beyond noise), reporting the measured exponent.
pub fn certify_almost_eigen<S: Real>(
    u: &SeparatedFunction<S>,
    op: &DriftOperator<S>,
    lambda: S,
    region: (S, S),
    convention: ResidualConvention,
    samples: usize,
) -> Result<AlmostEigenCertificate<S>> {
    let (lo, hi) = region;
    let (d_lo, d_hi) = u.domain();
    if lo < d_lo || hi > d_hi || lo >= hi {
        return Err(Error::Domain(format!(
            "certification region [{lo}, {hi}] outside profile domain [{d_lo}, {d_hi}]"
        )));
    }
    let count = samples.max(16);
    let ratio = (hi / lo).powf(S::one() / lit((count - 1) as f64));
    let mut residuals = Vec::with_capacity(count);
    let mut m_constant = S::zero();
    let mut r = lo;
    for _ in 0..count {
        let p = reduced_point(u, op, lambda, r)?;
        let w = convention.weight(r, p.abs_u, p.abs_grad);
        let rr = safe_div(p.op_value.abs(), w);
        if rr > m_constant {
            m_constant = rr;
        }
        residuals.push((r, rr));
        r = r * ratio;
    }

    let tail: Vec<(S, S)> = residuals
        .iter()
        .copied()
        .skip(count / 2)
        .filter(|&(_, v)| v > S::zero())
        .map(|(x, v)| (x.ln(), v.ln()))
        .collect();
    let growth_exponent = if tail.len() >= 4 {
        fitting::linear_fit(&tail).0
    } else {
        S::zero()
    };
    if growth_exponent > lit(0.5) && m_constant > lit(1e-8) {
        return Err(Error::ResidualDiverges {
            exponent: growth_exponent.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(AlmostEigenCertificate {
        m_constant,
        lambda,
        convention,
        region,
        residuals,
        growth_exponent,
        passed: m_constant.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exact_cone;
    use crate::profile::{ClosedTerm, LogFactor, RadialProfile};
    use crate::separated::SeparatedFunction;
    use std::rc::Rc;

    fn constant_one(n: usize) -> SeparatedFunction<f64> {
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile = RadialProfile::constant(1.0, (1.0, 100.0));
        SeparatedFunction::new(end, mode, profile)
    }

    #[test]
    fn annihilates_constants() {
        let u = constant_one(3);
        let v = apply_operator(&u, &DriftOperator::minus(0.0), 7.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn power_action_is_exact() {
        // L_m r^mu = -(mu/2) r^mu + mu(mu+n+m-2) r^{mu-2} on the exact cone
        for (n, m, mu) in [(3usize, 0.0, 1.5), (2, -2.0, 0.5), (4, 2.0, -1.0)] {
            let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
            let mode = end.constant_mode();
            let profile = RadialProfile::closed(vec![ClosedTerm::power(1.0, mu)], (1.0, 100.0));
            let u = SeparatedFunction::new(end, mode, profile);
            for &r in &[2.0, 7.0, 31.0] {
                let got = apply_operator(&u, &DriftOperator::minus(m), r).unwrap();
                let expect = -0.5 * mu * r.powf(mu) + mu * (mu + (n as f64) + m - 2.0) * r.powf(mu - 2.0);
                assert!((got - expect).abs() < 1e-11 * (1.0 + expect.abs()), "n={n} m={m} mu={mu} r={r}");
            }
        }
    }

    #[test]
    fn plus_operator_on_gaussian_weight_profile() {
        // r^2 |L_m^+ Phi_mu + (1/2)(mu+n+m) Phi_mu| / Phi_mu = |mu(mu+n+m-2)| exactly
        let (n, m, mu) = (3usize, 1.0, 2.0);
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile = RadialProfile::constant(1.0, (1.0, 100.0)).with_log_factor(LogFactor::gaussian(mu));
        let u = SeparatedFunction::new(end, mode, profile);
        let half_coeff = 0.5 * (mu + n as f64 + m);
        for &r in &[3.0, 11.0, 47.0] {
            let lhs = apply_shifted(&u, &DriftOperator::plus(m), half_coeff, r).unwrap();
            let phi = r.powf(mu) * (-r * r / 4.0).exp();
            let scaled = r * r * lhs.abs() / phi;
            let expect = (mu * (mu + n as f64 + m - 2.0)).abs();
            assert!((scaled - expect).abs() < 1e-8 * (1.0 + expect), "r={r}: {scaled} vs {expect}");
        }
    }

    #[test]
    fn minus_operator_on_inverse_gaussian_profile_exact_remainder() {
        // L_m Psi_mu - (1/2)(mu+n+m) Psi_mu = mu(mu+n+m-2) r^{-2} Psi_mu, exactly
        let (n, m, mu) = (2usize, -1.0, 1.5);
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile =
            RadialProfile::constant(1.0, (1.0, 100.0)).with_log_factor(LogFactor::inverse_gaussian(mu));
        let u = SeparatedFunction::new(end, mode, profile);
        for &r in &[2.0, 9.0, 20.0] {
            let lhs = apply_shifted(&u, &DriftOperator::minus(m), -0.5 * (mu + n as f64 + m), r).unwrap();
            let psi = r.powf(mu) * (r * r / 4.0).exp();
            let expect = mu * (mu + n as f64 + m - 2.0) * psi / (r * r);
            assert!((lhs / expect - 1.0).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn certify_constant_zero_m() {
        let u = constant_one(3);
        let cert = certify_almost_eigen(
            &u,
            &DriftOperator::minus(0.0),
            0.0,
            (2.0, 50.0),
            ResidualConvention::STANDARD,
            64,
        )
        .unwrap();
        assert_eq!(cert.m_constant, 0.0);
        assert!(cert.passed);
    }

    #[test]
    fn certify_linear_profile_reports_n_minus_one() {
        // (L_0 + 1/2) r = (n-1)/r; ratio (n-1) r/(r+1) climbs to ~ n-1
        let n = 3usize;
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile = RadialProfile::closed(vec![ClosedTerm::power(1.0, 1.0)], (1.0, 100.0));
        let u = SeparatedFunction::new(end, mode, profile);
        let cert = certify_almost_eigen(
            &u,
            &DriftOperator::minus(0.0),
            0.5,
            (10.0, 40.0),
            ResidualConvention::STANDARD,
            64,
        )
        .unwrap();
        let expect = (n - 1) as f64;
        assert!((cert.m_constant - expect).abs() < 10.0 / 40.0, "M = {}", cert.m_constant);
    }

    #[test]
    fn diverging_residual_is_rejected() {
        // u = r^3 claimed as (L_0 + 0)-harmonic: residual ratio grows ~ r^2
        let end = Rc::new(exact_cone::<f64>(3, 1.0, 100.0));
        let mode = end.constant_mode();
        let profile = RadialProfile::closed(vec![ClosedTerm::power(1.0, 3.0)], (1.0, 100.0));
        let u = SeparatedFunction::new(end, mode, profile);
        let r = certify_almost_eigen(
            &u,
            &DriftOperator::minus(0.0),
            0.0,
            (5.0, 90.0),
            ResidualConvention::STANDARD,
            64,
        );
        assert!(matches!(r, Err(Error::ResidualDiverges { .. })));
    }
}
