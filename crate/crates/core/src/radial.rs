//! Radial eigen-ODEs `f'' + p f' + q f = 0` for the drift operators,
//! asymptotic-series seeds, and branch classification.
//!
//! On the exact cone the ODE family is closed under conjugation by
//! `r^γ e^{σ_w r²/4}`, which is how both asymptotic branches are seeded:
//! the conjugated unknown `w` solves another member of the family with a
//! plain power series `1 + c₁ r⁻² + …` whose coefficients follow a first
//! order recurrence. Profiles built this way carry the exponential part in
//! their log factor instead of evaluating it.

use crate::error::{Error, Result};
use crate::fitting::{self, LogQuadFit};
use crate::geometry::WeaklyConicalEnd;
use crate::ode::{integrate, OdeOptions};
use crate::operators::DriftOperator;
use crate::profile::{LogFactor, RadialProfile};
use crate::scalar::{lit, Real};
use crate::separated::SeparatedFunction;
use std::rc::Rc;

/// Radial reduction of `(L + λ) (f·a) = 0` on an end.
#[derive(Clone)]
pub struct RadialOde<S> {
    pub end: Rc<WeaklyConicalEnd<S>>,
    pub operator: DriftOperator<S>,
    pub lambda: S,
    pub mu_link: S,
}

impl<S: Real> RadialOde<S> {
    pub fn new(end: Rc<WeaklyConicalEnd<S>>, operator: DriftOperator<S>, lambda: S, mu_link: S) -> Self {
        Self { end, operator, lambda, mu_link }
    }

    pub fn for_function(u: &SeparatedFunction<S>) -> Result<Self> {
        let ctx = u.context()?;
        Ok(Self::new(u.end.clone(), ctx.operator, ctx.lambda, u.mode.eigenvalue))
    }

    /// `(p, q)` at radius `r`.
    pub fn coeffs(&self, r: S) -> Result<(S, S)> {
        let (c2, c1) = self.end.laplace_coeffs(r)?;
        let g = self.end.grad_r(r)?;
        let ls = self.end.link_scale(r)?;
        let p = (c1 + self.operator.drift_coeff(r) * g * g) / c2;
        let q = (self.lambda - self.mu_link * ls) / c2;
        Ok((p, q))
    }

    fn cone_params(&self) -> Result<ConeOdeParams<S>> {
        if !self.end.shape.is_exact_cone() {
            return Err(Error::Precondition(
                "asymptotic seeds are built on the exact-cone reduction".into(),
            ));
        }
        Ok(ConeOdeParams {
            sigma: self.operator.sign.factor(),
            nm: lit::<S>(self.end.n as f64) + self.operator.m,
            lambda: self.lambda,
            mu: self.mu_link,
        })
    }
}

/// Exact-cone ODE `f'' + ((nm-1)/r + σ r/2) f' + (λ − μ/r²) f = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ConeOdeParams<S> {
    pub sigma: S,
    pub nm: S,
    pub lambda: S,
    pub mu: S,
}

impl<S: Real> ConeOdeParams<S> {
    pub fn coeffs(&self, r: S) -> (S, S) {
        let p = (self.nm - S::one()) / r + self.sigma * r * lit(0.5);
        let q = self.lambda - self.mu / (r * r);
        (p, q)
    }

    /// Conjugate by `r^γ e^{σ_w r²/4}`; stays in the family whenever
    /// `σ_w ∈ {0, −σ}`.
    fn conjugate(&self, gamma: S, sigma_w: S) -> ConeOdeParams<S> {
        let two = lit::<S>(2.0);
        let half = lit::<S>(0.5);
        ConeOdeParams {
            sigma: self.sigma + two * sigma_w,
            nm: self.nm + two * gamma,
            lambda: self.lambda
                + gamma * sigma_w
                + sigma_w * self.nm * half
                + self.sigma * gamma * half,
            mu: self.mu - gamma * gamma - gamma * (self.nm - two),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsymptoticBranch {
    /// Polynomially homogeneous branch `f ~ r^{2λσ̄}(1 + c₁r⁻² + …)`.
    Slow,
    /// `f ~ r^γ e^{-σ r²/4}(1 + …)` with `γ = −(n+m) + 2λσ`.
    Gaussian,
}

/// Power-series coefficients `c_k` (with `c₀ = 1`) for the degree-`d`
/// branch of an exact-cone ODE.
pub fn series_coefficients<S: Real>(
    params: &ConeOdeParams<S>,
    d: S,
    order: usize,
) -> Result<Vec<S>> {
    let two = lit::<S>(2.0);
    let mut cs = vec![S::one()];
    for k in 1..=order {
        let kf = lit::<S>(k as f64);
        let denom = params.sigma * (d / two - kf) + params.lambda;
        if denom.abs() < lit(1e-14) {
            return Err(Error::Domain(format!("series resonance at order {k}")));
        }
        let e = d - two * kf + two;
        let bracket = e * (d - two * kf + params.nm) - params.mu;
        let prev = *cs.last().expect("nonempty");
        cs.push(-prev * bracket / denom);
    }
    Ok(cs)
}

/// Seed data for one asymptotic branch at radius `R`.
#[derive(Clone, Debug)]
pub struct AsymptoticSeed<S> {
    pub branch: AsymptoticBranch,
    pub radius: S,
    pub order: usize,
    /// Series coefficients of the conjugated unknown `w = 1 + c₁r⁻² + …`.
    pub coefficients: Vec<S>,
    /// Exponential part `r^γ e^{σ_w r²/4}` of the branch.
    pub factor: LogFactor<S>,
    /// Conjugated ODE the reduced profile solves.
    pub conjugate: ConeOdeParams<S>,
    /// `(w(R), w'(R))` of the reduced unknown.
    pub reduced_state: (S, S),
    /// Conjugated-ODE residual of the truncated series at `2R`.
    pub residual_at_2r: S,
}

fn series_eval<S: Real>(cs: &[S], r: S) -> (S, S, S) {
    let mut w = S::zero();
    let mut dw = S::zero();
    let mut d2w = S::zero();
    for (k, &c) in cs.iter().enumerate() {
        let e = lit::<S>(-2.0 * k as f64);
        let p = r.powf(e);
        w = w + c * p;
        dw = dw + c * e * p / r;
        d2w = d2w + c * e * (e - S::one()) * p / (r * r);
    }
    (w, dw, d2w)
}

/// Build the branch seed; fails if the series is not decreasing at `R`.
pub fn asymptotic_seed<S: Real>(
    ode: &RadialOde<S>,
    branch: AsymptoticBranch,
    radius: S,
    order: usize,
) -> Result<AsymptoticSeed<S>> {
    let params = ode.cone_params()?;
    let two = lit::<S>(2.0);
    let (gamma, sigma_w) = match branch {
        AsymptoticBranch::Slow => (-two * params.lambda * params.sigma, S::zero()),
        AsymptoticBranch::Gaussian => (-params.nm + two * params.lambda * params.sigma, -params.sigma),
    };
    let conj = params.conjugate(gamma, sigma_w);
    debug_assert!(conj.lambda.abs() < lit(1e-10));
    let cs = series_coefficients(&conj, S::zero(), order)?;

    // admissibility: strictly decreasing magnitudes at the seed radius
    let r2 = radius * radius;
    for w in cs.windows(2) {
        if w[1].abs() / r2 >= lit::<S>(0.5) * w[0].abs() && w[0] != S::zero() {
            return Err(Error::SeriesNotDecreasing { at: radius.to_f64().unwrap_or(f64::NAN) });
        }
    }

    let (w, dw, _) = series_eval(&cs, radius);
    let rr = radius * two;
    let (w2, dw2, d2w2) = series_eval(&cs, rr);
    let (p2, q2) = conj.coeffs(rr);
    let residual_at_2r = (d2w2 + p2 * dw2 + q2 * w2).abs();

    Ok(AsymptoticSeed {
        branch,
        radius,
        order,
        coefficients: cs,
        factor: LogFactor { log_coeff: gamma, quad_coeff: sigma_w },
        conjugate: conj,
        reduced_state: (w, dw),
        residual_at_2r,
    })
}

fn ode_options<S: Real>(rel_tol: S, abs_tol: S) -> OdeOptions<S> {
    OdeOptions { rel_tol, abs_tol, ..OdeOptions::default() }
}

/// Integrate a branch from its series seed at `seed.radius` to `r_end`.
///
/// Stable directions: the seeded branch must dominate along the way
/// (slow branch of the minus operator inward, its gaussian branch outward,
/// and the mirrored pairs for the plus operator). Past the seed radius the
/// profile continues through the series itself, so tail integrals can reach
/// far beyond the numerically integrated span.
pub fn seeded_profile<S: Real>(
    seed: &AsymptoticSeed<S>,
    r_end: S,
    rel_tol: S,
) -> Result<RadialProfile<S>> {
    let conj = seed.conjugate;
    let f = move |r: S, y: &[S; 2]| {
        let (p, q) = conj.coeffs(r);
        [y[1], -(p * y[1] + q * y[0])]
    };
    let sol = integrate(
        f,
        seed.radius,
        r_end,
        [seed.reduced_state.0, seed.reduced_state.1],
        &ode_options(rel_tol, lit(1e-300)),
    )?;

    struct SeededFn<S> {
        dense: crate::ode::DenseSolution<S, 2>,
        conj: ConeOdeParams<S>,
        coefficients: Vec<S>,
    }
    impl<S: Real> crate::profile::ProfileFn<S> for SeededFn<S> {
        fn jet(&self, r: S) -> Result<crate::profile::Jet<S>> {
            let (_, dhi) = self.dense.span();
            if self.dense.contains(r) {
                let y = self.dense.eval(r)?;
                let (p, q) = self.conj.coeffs(r);
                Ok(crate::profile::Jet { f: y[0], df: y[1], d2f: -(p * y[1] + q * y[0]) })
            } else if r > dhi {
                let (w, dw, d2w) = series_eval(&self.coefficients, r);
                Ok(crate::profile::Jet { f: w, df: dw, d2f: d2w })
            } else {
                Err(Error::Domain(format!("radius {r} below the integrated span")))
            }
        }
        fn domain(&self) -> (S, S) {
            let (dlo, dhi) = self.dense.span();
            // series continuation reaches far past any radius the lab uses
            (dlo, dhi * lit(1e6))
        }
    }

    let inner = SeededFn { dense: sol, conj, coefficients: seed.coefficients.clone() };
    Ok(RadialProfile::custom(Rc::new(inner)).with_log_factor(seed.factor))
}

/// Integrate from explicit data `(f, f')` at `r0` to `r_end`.
pub fn integrate_profile<S: Real>(
    ode: &RadialOde<S>,
    r0: S,
    state: (S, S),
    r_end: S,
    rel_tol: S,
) -> Result<RadialProfile<S>> {
    let o = ode.clone();
    let f = move |r: S, y: &[S; 2]| {
        let (p, q) = o.coeffs(r).expect("coefficients inside integration span");
        [y[1], -(p * y[1] + q * y[0])]
    };
    let sol = integrate(f, r0, r_end, [state.0, state.1], &ode_options(rel_tol, lit(1e-300)))?;
    let o2 = ode.clone();
    let coeffs = Rc::new(move |r: S| o2.coeffs(r).expect("coefficients inside domain"));
    Ok(RadialProfile::from_dense(sol, coeffs))
}

/// `(ln |W|, sign W)` of the Wronskian `f₁ f₂' − f₁' f₂`, computed with the
/// exponential factors cancelled analytically.
pub fn wronskian_log<S: Real>(
    p1: &RadialProfile<S>,
    p2: &RadialProfile<S>,
    r: S,
) -> Result<(S, S)> {
    let j1 = p1.reduced_jet(r)?;
    let j2 = p2.reduced_jet(r)?;
    let (l1, dl1, _) = p1.log_factor.jet(r);
    let (l2, dl2, _) = p2.log_factor.jet(r);
    // W = e^{l1+l2} [F1 (F2' + l2' F2) - (F1' + l1' F1) F2]
    let bracket = j1.f * (j2.df + dl2 * j2.f) - (j1.df + dl1 * j1.f) * j2.f;
    Ok((bracket.abs().ln() + l1 + l2, bracket.signum()))
}

/// Abel invariant `ln|W| + (nm−1) ln r + σ r²/4`, constant along exact-cone
/// solutions of the same ODE.
pub fn abel_log_invariant<S: Real>(
    ode: &RadialOde<S>,
    p1: &RadialProfile<S>,
    p2: &RadialProfile<S>,
    r: S,
) -> Result<S> {
    let params = ode.cone_params()?;
    let (logw, _) = wronskian_log(p1, p2, r)?;
    Ok(logw + (params.nm - S::one()) * r.ln() + params.sigma * r * r / lit(4.0))
}

/// Express `y` in the basis `(b1, b2)` by Wronskian projection at `r`.
pub fn decompose_in_basis<S: Real>(
    y: &RadialProfile<S>,
    b1: &RadialProfile<S>,
    b2: &RadialProfile<S>,
    r: S,
) -> Result<(S, S)> {
    let (l_y1, s_y1) = wronskian_log(y, b1, r)?;
    let (l_y2, s_y2) = wronskian_log(y, b2, r)?;
    let (l_21, s_21) = wronskian_log(b2, b1, r)?;
    let c2 = s_y1 * s_21 * (l_y1 - l_21).exp();
    let c1 = -s_y2 * s_21 * (l_y2 - l_21).exp();
    Ok((c1, c2))
}

/// Fit report for a decay-rate measurement.
#[derive(Clone, Debug)]
pub struct RateFitReport<S> {
    pub alpha_hat: S,
    pub beta_hat: S,
    pub expected_alpha: S,
    pub expected_beta: S,
    pub residual_rms: S,
}

impl<S: Real> RateFitReport<S> {
    pub fn alpha_rel_err(&self) -> S {
        ((self.alpha_hat - self.expected_alpha) / self.expected_alpha).abs()
    }

    pub fn beta_rel_err(&self) -> S {
        if self.expected_beta.is_zero() {
            self.beta_hat.abs()
        } else {
            ((self.beta_hat - self.expected_beta) / self.expected_beta).abs()
        }
    }
}

/// Least-squares fit of `log|v|` against `β r² + α ln r + c` on samples
/// `(r, v)`; rejects windows where `v` changes sign.
pub fn decaying_mode_rate<S: Real>(
    samples: &[(S, S)],
    expected: (S, S),
) -> Result<RateFitReport<S>> {
    if samples.len() < 6 {
        return Err(Error::Precondition("rate fit needs >= 6 samples".into()));
    }
    let first_sign = samples[0].1.signum();
    for &(_, v) in samples {
        if v.is_zero() || v.signum() != first_sign {
            return Err(Error::Oscillation);
        }
    }
    let logged: Vec<(S, S)> = samples.iter().map(|&(r, v)| (r, v.abs().ln())).collect();
    let LogQuadFit { alpha, beta, residual_rms, .. } = fitting::fit_log_quadratic(&logged)?;
    Ok(RateFitReport {
        alpha_hat: alpha,
        beta_hat: beta,
        expected_alpha: expected.0,
        expected_beta: expected.1,
        residual_rms,
    })
}

/// Same fit, sampling a profile's log-safe values on a geometric grid.
pub fn profile_rate_fit<S: Real>(
    profile: &RadialProfile<S>,
    window: (S, S),
    samples: usize,
    expected: (S, S),
) -> Result<RateFitReport<S>> {
    let (lo, hi) = window;
    if hi < lo + lit(4.0) {
        return Err(Error::Precondition("rate-fit window must span at least 4".into()));
    }
    let ratio = (hi / lo).powf(S::one() / lit((samples - 1) as f64));
    let mut pts = Vec::with_capacity(samples);
    let mut r = lo;
    let mut sign = S::zero();
    for _ in 0..samples {
        let (logv, s) = profile.log_abs_value(r)?;
        if sign.is_zero() {
            sign = s;
        } else if s != sign {
            return Err(Error::Oscillation);
        }
        pts.push((r, logv));
        r = r * ratio;
    }
    let LogQuadFit { alpha, beta, residual_rms, .. } = fitting::fit_log_quadratic(&pts)?;
    Ok(RateFitReport {
        alpha_hat: alpha,
        beta_hat: beta,
        expected_alpha: expected.0,
        expected_beta: expected.1,
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exact_cone;
    use crate::operators::DriftSign;

    fn cone_ode(n: usize, m: f64, lambda: f64, mu: f64, sign: DriftSign) -> RadialOde<f64> {
        let end = Rc::new(exact_cone::<f64>(n, 1.0, 120.0));
        RadialOde::new(end, DriftOperator { sign, m }, lambda, mu)
    }

    #[test]
    fn coefficient_examples() {
        let ode = cone_ode(3, 0.0, 0.0, 2.0, DriftSign::Minus);
        let (p, q) = ode.coeffs(4.0).unwrap();
        assert!((p - (2.0 / 4.0 - 2.0)).abs() < 1e-14);
        assert!((q - (-2.0 / 16.0)).abs() < 1e-14);

        let ode = cone_ode(2, 0.0, -0.5, 0.0, DriftSign::Plus);
        let (p, q) = ode.coeffs(3.0).unwrap();
        assert!((p - (1.0 / 3.0 + 1.5)).abs() < 1e-14);
        assert!((q + 0.5).abs() < 1e-14);
    }

    #[test]
    fn constant_solution_stays_constant() {
        let ode = cone_ode(3, 1.0, 0.0, 0.0, DriftSign::Minus);
        let prof = integrate_profile(&ode, 5.0, (1.0, 0.0), 40.0, 1e-11).unwrap();
        for &r in &[6.0, 20.0, 39.5] {
            let j = prof.value_jet(r).unwrap();
            assert!((j.f - 1.0).abs() < 1e-12, "f({r}) = {}", j.f);
            assert!(j.df.abs() < 1e-12);
        }
    }

    #[test]
    fn slow_series_first_coefficients() {
        // lambda=0: c1 = mu for any m
        let ode = cone_ode(3, 2.0, 0.0, 6.0, DriftSign::Minus);
        let seed = asymptotic_seed(&ode, AsymptoticBranch::Slow, 30.0, 4).unwrap();
        assert!((seed.coefficients[1] - 6.0).abs() < 1e-12);
        assert_eq!(seed.factor.log_coeff, 0.0);
        assert_eq!(seed.factor.quad_coeff, 0.0);

        // lambda=1/2, mu=0, m=0: f = r (1 - (n-1) r^{-2} + ...)
        for n in [2usize, 3, 4] {
            let ode = cone_ode(n, 0.0, 0.5, 0.0, DriftSign::Minus);
            let seed = asymptotic_seed(&ode, AsymptoticBranch::Slow, 30.0, 4).unwrap();
            assert!((seed.factor.log_coeff - 1.0).abs() < 1e-14);
            assert!((seed.coefficients[1] + (n as f64 - 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn gaussian_branch_exponent() {
        // (L_0 + 1/2): leading exponent -n-1 with e^{+r^2/4}
        for n in [2usize, 3] {
            let ode = cone_ode(n, 0.0, 0.5, 0.0, DriftSign::Minus);
            let seed = asymptotic_seed(&ode, AsymptoticBranch::Gaussian, 20.0, 4).unwrap();
            assert!((seed.factor.log_coeff + (n as f64 + 1.0)).abs() < 1e-14);
            assert_eq!(seed.factor.quad_coeff, 1.0);
        }
        // plus-drift, lambda = -1/2: gamma = 2lambda - n - m = -n-1, e^{-r^2/4}
        let ode = cone_ode(2, 0.0, -0.5, 0.0, DriftSign::Plus);
        let seed = asymptotic_seed(&ode, AsymptoticBranch::Gaussian, 20.0, 4).unwrap();
        assert!((seed.factor.log_coeff + 3.0).abs() < 1e-14);
        assert_eq!(seed.factor.quad_coeff, -1.0);
    }

    #[test]
    fn seed_rejects_small_radius() {
        // strongly coupled series: small R fails the decrease check
        let ode = cone_ode(3, 0.0, 0.0, 120.0, DriftSign::Minus);
        match asymptotic_seed(&ode, AsymptoticBranch::Slow, 3.0, 6) {
            Err(Error::SeriesNotDecreasing { .. }) => {}
            other => panic!("expected series failure, got {other:?}"),
        }
    }

    #[test]
    fn inward_integration_matches_series() {
        // seed slow branch at R=30 (n=3, mu=2, lambda=0), run to 20,
        // compare with the order-4 series there
        let ode = cone_ode(3, 0.0, 0.0, 2.0, DriftSign::Minus);
        let seed = asymptotic_seed(&ode, AsymptoticBranch::Slow, 30.0, 6).unwrap();
        let prof = seeded_profile(&seed, 18.0, 1e-11).unwrap();
        let short = series_coefficients(&seed.conjugate, 0.0, 4).unwrap();
        let r: f64 = 20.0;
        let series: f64 = short.iter().enumerate().map(|(k, c)| c * r.powi(-2 * k as i32)).sum::<f64>();
        let got = prof.value(r).unwrap();
        assert!((got / series - 1.0).abs() < 1e-8, "got {got}, series {series}");
    }

    #[test]
    fn abel_invariant_constant() {
        // pair the slow branch with a generic (gaussian-dominated) solution:
        // their Wronskian stays comparable to its terms, so the invariant is
        // resolvable to full precision along the whole span
        let ode = cone_ode(3, 1.0, 0.25, 2.0, DriftSign::Minus);
        let seed = asymptotic_seed(&ode, AsymptoticBranch::Slow, 60.0, 8).unwrap();
        let a = seeded_profile(&seed, 8.0, 1e-11).unwrap();
        let b = integrate_profile(&ode, 8.0, (0.0, 1.0), 30.0, 1e-11).unwrap();
        let base = abel_log_invariant(&ode, &a, &b, 9.0).unwrap();
        for &r in &[12.0, 19.0, 28.0] {
            let v = abel_log_invariant(&ode, &a, &b, r).unwrap();
            assert!(((v - base).exp() - 1.0f64).abs() < 1e-9, "drift {}", v - base);
        }
    }

    #[test]
    fn basis_decomposition_is_exact() {
        let ode = cone_ode(3, 0.0, 0.5, 0.0, DriftSign::Minus);
        let b1 = integrate_profile(&ode, 8.0, (1.0, 0.1), 25.0, 1e-11).unwrap();
        let b2 = integrate_profile(&ode, 8.0, (0.0, 1.0), 25.0, 1e-11).unwrap();
        // y = 2 b1 - 3 b2 by initial data
        let y = integrate_profile(&ode, 8.0, (2.0, 0.2 - 3.0), 25.0, 1e-11).unwrap();
        // projection is well conditioned near the common data radius
        let (c1, c2) = decompose_in_basis(&y, &b1, &b2, 8.5).unwrap();
        assert!((c1 - 2.0).abs() < 1e-7, "c1 = {c1}");
        assert!((c2 + 3.0).abs() < 1e-7, "c2 = {c2}");
    }

    #[test]
    fn rate_fit_and_oscillation_guard() {
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let r = 10.0 + 0.5 * i as f64;
                (r, r.powf(-3.0) * (-r * r / 4.0).exp())
            })
            .collect();
        let fit = decaying_mode_rate(&samples, (-3.0, -0.25)).unwrap();
        assert!(fit.alpha_rel_err() < 1e-6);
        assert!(fit.beta_rel_err() < 1e-8);

        let osc: Vec<(f64, f64)> = (0..10).map(|i| (10.0 + i as f64, (-1.0f64).powi(i))).collect();
        assert!(matches!(decaying_mode_rate(&osc, (0.0, 0.0)), Err(Error::Oscillation)));
    }
}
