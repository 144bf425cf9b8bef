//! Radial profiles `f(r)` with first and second derivatives.
//!
//! A profile is a reduced part (closed form or ODE dense output) times an
//! explicit log-domain factor `exp(ℓ(r))` with
//! `ℓ(r) = log_coeff · ln r + quad_coeff · r²/4`. The factor family is
//! closed under the eigenfunction transformations (`r^{2μ}`, `Φ_μ`, `Ψ_μ`),
//! so twisted profiles never evaluate `e^{±r²/4}` directly and compositions
//! cancel coefficient-exactly.

use crate::error::{Error, Result};
use crate::ode::DenseSolution;
use crate::scalar::{lit, Real};
use std::rc::Rc;

/// Value, first and second derivative at a radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<S> {
    pub f: S,
    pub df: S,
    pub d2f: S,
}

impl<S: Real> Jet<S> {
    pub fn zero() -> Self {
        Self { f: S::zero(), df: S::zero(), d2f: S::zero() }
    }
}

/// Multiplicative factor `exp(log_coeff · ln r + quad_coeff · r²/4)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFactor<S> {
    pub log_coeff: S,
    pub quad_coeff: S,
}

impl<S: Real> LogFactor<S> {
    pub fn zero() -> Self {
        Self { log_coeff: S::zero(), quad_coeff: S::zero() }
    }

    pub fn power(two_mu: S) -> Self {
        Self { log_coeff: two_mu, quad_coeff: S::zero() }
    }

    /// `Φ_μ` factor.
    pub fn gaussian(mu: S) -> Self {
        Self { log_coeff: mu, quad_coeff: -S::one() }
    }

    /// `Ψ_μ` factor.
    pub fn inverse_gaussian(mu: S) -> Self {
        Self { log_coeff: mu, quad_coeff: S::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.log_coeff.is_zero() && self.quad_coeff.is_zero()
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            log_coeff: self.log_coeff + other.log_coeff,
            quad_coeff: self.quad_coeff + other.quad_coeff,
        }
    }

    /// `(ℓ, ℓ′, ℓ″)` at `r`.
    pub fn jet(&self, r: S) -> (S, S, S) {
        let four = lit::<S>(4.0);
        let two = lit::<S>(2.0);
        let l = self.log_coeff * r.ln() + self.quad_coeff * r * r / four;
        let dl = self.log_coeff / r + self.quad_coeff * r / two;
        let d2l = -self.log_coeff / (r * r) + self.quad_coeff / two;
        (l, dl, d2l)
    }
}

/// One closed-form term `coeff · r^power · e^{-exp_rate · r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedTerm<S> {
    pub coeff: S,
    pub power: S,
    pub exp_rate: S,
}

impl<S: Real> ClosedTerm<S> {
    pub fn constant(c: S) -> Self {
        Self { coeff: c, power: S::zero(), exp_rate: S::zero() }
    }

    pub fn power(c: S, p: S) -> Self {
        Self { coeff: c, power: p, exp_rate: S::zero() }
    }

    fn jet(&self, r: S) -> Jet<S> {
        let p = self.power;
        let s = self.exp_rate;
        let base = self.coeff * r.powf(p) * (-s * r).exp();
        // logarithmic derivative p/r - s
        let dl = p / r - s;
        let d2l = -p / (r * r);
        Jet {
            f: base,
            df: base * dl,
            d2f: base * (d2l + dl * dl),
        }
    }
}

/// Black-box profile backing (used by the self-similar graph heights).
pub trait ProfileFn<S> {
    fn jet(&self, r: S) -> Result<Jet<S>>;
    fn domain(&self) -> (S, S);
}

#[derive(Clone)]
pub enum ProfileRepr<S> {
    Closed(Vec<ClosedTerm<S>>),
    /// Dense output of a second-order ODE solved as `(f, f')`; `f''` is
    /// reconstructed from the stored coefficient functions.
    Dense {
        solution: Rc<DenseSolution<S, 2>>,
        /// `(p, q)` of `f'' + p f' + q f = 0`, used to rebuild `f''`.
        coeffs: Rc<dyn Fn(S) -> (S, S)>,
    },
    Custom(Rc<dyn ProfileFn<S>>),
}

impl<S> std::fmt::Debug for ProfileRepr<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileRepr::Closed(t) => write!(f, "Closed({} terms)", t.len()),
            ProfileRepr::Dense { .. } => write!(f, "Dense"),
            ProfileRepr::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A radial profile with derivatives, valid on a domain `[r_lo, r_hi]`.
#[derive(Clone, Debug)]
pub struct RadialProfile<S> {
    repr: ProfileRepr<S>,
    pub log_factor: LogFactor<S>,
    domain: (S, S),
}

impl<S: Real> RadialProfile<S> {
    pub fn constant(c: S, domain: (S, S)) -> Self {
        Self::closed(vec![ClosedTerm::constant(c)], domain)
    }

    pub fn closed(terms: Vec<ClosedTerm<S>>, domain: (S, S)) -> Self {
        Self { repr: ProfileRepr::Closed(terms), log_factor: LogFactor::zero(), domain }
    }

    pub fn from_dense(solution: DenseSolution<S, 2>, coeffs: Rc<dyn Fn(S) -> (S, S)>) -> Self {
        let domain = solution.span();
        Self {
            repr: ProfileRepr::Dense { solution: Rc::new(solution), coeffs },
            log_factor: LogFactor::zero(),
            domain,
        }
    }

    pub fn custom(f: Rc<dyn ProfileFn<S>>) -> Self {
        let domain = f.domain();
        Self { repr: ProfileRepr::Custom(f), log_factor: LogFactor::zero(), domain }
    }

    pub fn domain(&self) -> (S, S) {
        self.domain
    }

    pub fn restrict(mut self, lo: S, hi: S) -> Self {
        self.domain = (self.domain.0.max(lo), self.domain.1.min(hi));
        self
    }

    /// Same profile times `exp(ℓ(r))`.
    pub fn with_log_factor(mut self, extra: LogFactor<S>) -> Self {
        self.log_factor = self.log_factor.compose(&extra);
        self
    }

    fn check_domain(&self, r: S) -> Result<()> {
        if r < self.domain.0 || r > self.domain.1 {
            return Err(Error::Domain(format!(
                "radius {r} outside profile domain [{}, {}]",
                self.domain.0, self.domain.1
            )));
        }
        Ok(())
    }

    /// Jet of the reduced part (log factor excluded).
    pub fn reduced_jet(&self, r: S) -> Result<Jet<S>> {
        self.check_domain(r)?;
        match &self.repr {
            ProfileRepr::Closed(terms) => {
                let mut j = Jet::zero();
                for t in terms {
                    let tj = t.jet(r);
                    j.f = j.f + tj.f;
                    j.df = j.df + tj.df;
                    j.d2f = j.d2f + tj.d2f;
                }
                Ok(j)
            }
            ProfileRepr::Dense { solution, coeffs } => {
                let y = solution.eval(r)?;
                let (p, q) = coeffs(r);
                Ok(Jet { f: y[0], df: y[1], d2f: -(p * y[1] + q * y[0]) })
            }
            ProfileRepr::Custom(f) => f.jet(r),
        }
    }

    /// True-value jet `f·e^ℓ` with derivatives; may saturate to 0/±∞ where
    /// the factor leaves the floating range.
    pub fn value_jet(&self, r: S) -> Result<Jet<S>> {
        let red = self.reduced_jet(r)?;
        if self.log_factor.is_zero() {
            return Ok(red);
        }
        let (l, dl, d2l) = self.log_factor.jet(r);
        let e = l.exp();
        Ok(Jet {
            f: red.f * e,
            df: (red.df + dl * red.f) * e,
            d2f: (red.d2f + lit::<S>(2.0) * dl * red.df + (d2l + dl * dl) * red.f) * e,
        })
    }

    pub fn value(&self, r: S) -> Result<S> {
        Ok(self.value_jet(r)?.f)
    }

    /// `ln |f(r)|` without overflow, and the sign of `f(r)`.
    pub fn log_abs_value(&self, r: S) -> Result<(S, S)> {
        let red = self.reduced_jet(r)?;
        let (l, _, _) = self.log_factor.jet(r);
        Ok((red.f.abs().ln() + l, red.f.signum()))
    }

    /// Estimated Gaussian growth exponent `q̂` with `f ~ e^{q̂ r²/4}` near the
    /// outer end of the domain (polynomial factors contribute ~0).
    pub fn growth_quad_coeff(&self) -> S {
        let (lo, hi) = self.domain;
        let r1 = lo + (hi - lo) * lit(0.7);
        let r2 = hi;
        let base = match (self.log_abs_value(r1), self.log_abs_value(r2)) {
            (Ok((l1, _)), Ok((l2, _))) if l1.is_finite() && l2.is_finite() => {
                lit::<S>(4.0) * (l2 - l1) / (r2 * r2 - r1 * r1)
            }
            _ => S::zero(),
        };
        base
    }

    /// CSV export with columns `r,f,f',f''`.
    pub fn to_csv(&self, grid: &[S]) -> Result<String> {
        let mut out = String::from("r,f,f',f''\n");
        for &r in grid {
            let j = self.value_jet(r)?;
            out.push_str(&format!("{:?},{:?},{:?},{:?}\n", r, j.f, j.df, j.d2f));
        }
        Ok(out)
    }
}
