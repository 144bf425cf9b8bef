//! The radial weights `Φ_m(t) = t^m e^{-t²/4}` and `Ψ_m(t) = t^m e^{+t²/4}`.
//!
//! All weight arithmetic is done in the log domain: `log w = m ln t ∓ t²/4`
//! is finite wherever the direct value over- or underflows, and products
//! like `Φ_μ Ψ_μ = r^{2μ}` reduce to adding coefficient pairs exactly.

use crate::scalar::{lit, Real};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `Φ_m(t) = t^m e^{-t²/4}`
    Gaussian,
    /// `Ψ_m(t) = t^m e^{+t²/4}`
    InverseGaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec<S> {
    pub kind: WeightKind,
    pub m: S,
}

impl<S: Real> WeightSpec<S> {
    pub fn gaussian(m: S) -> Self {
        Self { kind: WeightKind::Gaussian, m }
    }

    pub fn inverse_gaussian(m: S) -> Self {
        Self { kind: WeightKind::InverseGaussian, m }
    }

    pub fn general(&self) -> GeneralWeight<S> {
        let quad = match self.kind {
            WeightKind::Gaussian => -S::one(),
            WeightKind::InverseGaussian => S::one(),
        };
        GeneralWeight { m: self.m, quad }
    }

    /// `(value, log_value)` at `t > 0`. The log value is exact to machine
    /// precision of the formula; the direct value saturates gracefully.
    pub fn eval(&self, t: S) -> crate::error::Result<(S, S)> {
        if t <= S::zero() {
            return Err(crate::error::Error::Domain(format!(
                "weight evaluated at t = {t} <= 0"
            )));
        }
        let lv = self.general().log_value(t);
        Ok((lv.exp(), lv))
    }
}

/// Internal closure of the weight family under the products the lab forms:
/// `log w(t) = m ln t + quad · t²/4`.
///
/// `Φ_m` has `quad = -1`, `Ψ_m` has `quad = +1`, and multiplying weights or
/// twisted profiles adds the coefficient pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralWeight<S> {
    pub m: S,
    pub quad: S,
}

impl<S: Real> GeneralWeight<S> {
    pub fn gaussian(m: S) -> Self {
        Self { m, quad: -S::one() }
    }

    pub fn log_value(&self, t: S) -> S {
        self.m * t.ln() + self.quad * t * t / lit(4.0)
    }

    /// d/dt of the log value.
    pub fn dlog(&self, t: S) -> S {
        self.m / t + self.quad * t / lit(2.0)
    }

    /// Location of the interior maximum of `log w` (if any): `√(-2m/quad)`.
    pub fn interior_max(&self) -> Option<S> {
        let two = lit::<S>(2.0);
        if self.quad < S::zero() && self.m > S::zero() {
            Some((two * self.m / -self.quad).sqrt())
        } else {
            None
        }
    }

    /// Shift the polynomial exponent, e.g. to fold in an `r^{n-1}` area factor.
    pub fn with_extra_degree(&self, degree: S) -> Self {
        Self { m: self.m + degree, quad: self.quad }
    }

    /// True when `w(t) → 0` fast enough for Gaussian-type tail truncation.
    pub fn decays(&self) -> bool {
        self.quad < S::zero()
    }
}

/// Controls for the adaptive radial quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec<S> {
    pub rel_tol: S,
    pub abs_tol: S,
    pub max_subdivisions: usize,
    /// Truncate `∫_a^∞` where the (full-integrand) weight has dropped below
    /// this ratio relative to its maximum over the domain.
    pub tail_cutoff_ratio: S,
}

impl<S: Real> Default for QuadratureSpec<S> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-10),
            abs_tol: lit(1e-14),
            max_subdivisions: 4000,
            tail_cutoff_ratio: lit(1e-16),
        }
    }
}

impl<S: Real> QuadratureSpec<S> {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.rel_tol <= S::zero() || self.abs_tol <= S::zero() {
            return Err(crate::error::Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.tail_cutoff_ratio <= S::zero() || self.tail_cutoff_ratio > lit(1e-12) {
            return Err(crate::error::Error::Domain(
                "tail_cutoff_ratio must lie in (0, 1e-12]".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_values_match_formulas() {
        let w = WeightSpec::gaussian(0.0_f64);
        let (v, _) = w.eval(2.0).unwrap();
        assert!((v - (-1.0_f64).exp()).abs() < 1e-12);

        let w = WeightSpec::inverse_gaussian(2.0_f64);
        let (v, _) = w.eval(2.0).unwrap();
        assert!((v - 4.0 * 1.0_f64.exp()).abs() < 4e-12);

        let w = WeightSpec::gaussian(-3.0_f64);
        let (v, lv) = w.eval(10.0).unwrap();
        let expect = 1e-3 * (-25.0_f64).exp();
        assert!((v / expect - 1.0).abs() < 1e-12);
        assert!((lv - expect.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_value_finite_where_value_saturates() {
        let w = WeightSpec::inverse_gaussian(2.0_f64);
        let (v, lv) = w.eval(9000.0).unwrap();
        assert!(v.is_infinite());
        assert!(lv.is_finite());

        let w = WeightSpec::gaussian(0.0_f64);
        let (v, lv) = w.eval(9000.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(lv.is_finite());
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(WeightSpec::gaussian(1.0_f64).eval(0.0).is_err());
        assert!(WeightSpec::gaussian(1.0_f64).eval(-2.0).is_err());
    }

    #[test]
    fn monotone_decrease_past_sqrt_2m() {
        // strictly decreasing for t > sqrt(2m) when m > 0, all t when m <= 0
        for &m in &[-2.0_f64, 0.0, 3.0] {
            let w = WeightSpec::gaussian(m);
            let start = if m > 0.0 { (2.0 * m).sqrt() * 1.0001 } else { 0.05 };
            let mut prev = f64::INFINITY;
            let mut t = start;
            while t < 40.0 {
                let (_, lv) = w.eval(t).unwrap();
                assert!(lv < prev, "not decreasing at t={t} for m={m}");
                prev = lv;
                t += 0.37;
            }
        }
    }
}
