//! Rotationally symmetric self-shrinker and self-expander profiles.
//!
//! A profile is the graph height `u(s)` over the exterior of a ball in the
//! hyperplane, solving
//!
//! `u''/(1+u'²) + (n-1)u'/s ± (s u' − u)/2 = 0`
//!
//! with `−` for shrinkers and `+` for expanders (the sign the shrinking
//! sphere `u = −√(2n − s²)` solves exactly). Same-cone expander pairs are
//! realized through an exact difference ODE integrated inward along a
//! stored base, seeded with the linearized decaying mode; this keeps the
//! difference cancellation-free down to magnitudes ~e^{-r²/4}.

use crate::error::{Error, Result};
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::profile::{Jet, ProfileFn, RadialProfile};
use crate::scalar::{lit, Real};
use serde::{Deserialize, Serialize};
use std::rc::Rc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfSimilarKind {
    Shrinker,
    Expander,
}

impl SelfSimilarKind {
    /// Sign of the `(s u' − u)/2` term in the graphical equation.
    pub fn sign<S: Real>(&self) -> S {
        match self {
            SelfSimilarKind::Shrinker => -S::one(),
            SelfSimilarKind::Expander => S::one(),
        }
    }
}

/// `K = (n-1)u'/s + sign (s u' − u)/2`; the profile equation is
/// `u'' = −(1+u'²) K`.
fn curvature_term<S: Real>(n: usize, sign: S, s: S, u: S, p: S) -> S {
    lit::<S>((n - 1) as f64) * p / s + sign * (s * p - u) * lit(0.5)
}

fn rhs<S: Real>(n: usize, sign: S, s: S, u: S, p: S) -> S {
    -(S::one() + p * p) * curvature_term(n, sign, s, u, p)
}

/// `d/ds u''` along a solution, from the closed-form partials of the rhs.
fn rhs_total_derivative<S: Real>(n: usize, sign: S, s: S, u: S, p: S, upp: S) -> S {
    let nm1 = lit::<S>((n - 1) as f64);
    let half = lit::<S>(0.5);
    let k = curvature_term(n, sign, s, u, p);
    let dk_ds = -nm1 * p / (s * s) + sign * p * half;
    let dk_du = -sign * half;
    let dk_dp = nm1 / s + sign * s * half;
    let one_p2 = S::one() + p * p;
    -(one_p2 * (dk_ds + dk_du * p + dk_dp * upp) + lit::<S>(2.0) * p * upp * k)
}

/// A solved rotationally symmetric self-similar end.
#[derive(Clone)]
pub struct SelfSimilarEnd<S> {
    pub kind: SelfSimilarKind,
    pub n: usize,
    base: Rc<DenseSolution<S, 2>>,
}

impl<S> std::fmt::Debug for SelfSimilarEnd<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SelfSimilarEnd({:?}, n={})", self.kind, self.n)
    }
}

impl<S: Real> SelfSimilarEnd<S> {
    pub fn s_span(&self) -> (S, S) {
        self.base.span()
    }

    /// `(u, u', u'')` at base radius `s`.
    pub fn u_jet(&self, s: S) -> Result<Jet<S>> {
        let y = self.base.eval(s)?;
        Ok(Jet { f: y[0], df: y[1], d2f: rhs(self.n, self.kind.sign(), s, y[0], y[1]) })
    }

    /// Extrinsic radius `r(s) = √(s² + u²)` with two derivatives in `s`.
    pub fn r_jet(&self, s: S) -> Result<Jet<S>> {
        let u = self.u_jet(s)?;
        let r = s.hypot(u.f);
        let rp = (s + u.f * u.df) / r;
        let rpp = (S::one() + u.df * u.df + u.f * u.d2f - rp * rp) / r;
        Ok(Jet { f: r, df: rp, d2f: rpp })
    }

    /// Invert `r(s)`; the map is monotone on the solved span.
    pub fn s_of_r(&self, r: S) -> Result<S> {
        let (lo, hi) = self.base.span();
        let r_lo = self.r_jet(lo)?.f;
        let r_hi = self.r_jet(hi)?.f;
        if r < r_lo || r > r_hi {
            return Err(Error::Domain(format!(
                "extrinsic radius {r} outside covered range [{r_lo}, {r_hi}]"
            )));
        }
        let mut a = lo;
        let mut b = hi;
        let mut s = (a + b) * lit(0.5);
        for _ in 0..200 {
            let j = self.r_jet(s)?;
            let gap = j.f - r;
            if gap.abs() <= r * S::epsilon() * lit(4.0) {
                return Ok(s);
            }
            if gap > S::zero() {
                b = s;
            } else {
                a = s;
            }
            let newton = s - gap / j.df;
            s = if newton > a && newton < b { newton } else { (a + b) * lit(0.5) };
        }
        Ok(s)
    }

    /// Extrinsic radial range covered by the solved span.
    pub fn r_span(&self) -> Result<(S, S)> {
        let (lo, hi) = self.base.span();
        Ok((self.r_jet(lo)?.f, self.r_jet(hi)?.f))
    }

    /// `|∇_g r|` at base radius `s`.
    pub fn grad_r(&self, s: S) -> Result<S> {
        let u = self.u_jet(s)?;
        let rj = self.r_jet(s)?;
        let a = S::one() + u.df * u.df;
        Ok(rj.df / a.sqrt())
    }

    /// Frobenius norm of `∇²r² − 2g` at base radius `s`.
    pub fn hessian_gap(&self, s: S) -> Result<S> {
        let u = self.u_jet(s)?;
        let a = S::one() + u.df * u.df;
        let ap = lit::<S>(2.0) * u.df * u.d2f;
        // f = r² = s² + u²
        let fp = lit::<S>(2.0) * (s + u.f * u.df);
        let fpp = lit::<S>(2.0) * (S::one() + u.df * u.df + u.f * u.d2f);
        let two = lit::<S>(2.0);
        let t_ss = (fpp - ap * fp / (two * a)) / a - two;
        let t_link = fp / (s * a) - two;
        Ok((t_ss * t_ss + lit::<S>((self.n - 1) as f64) * t_link * t_link).sqrt())
    }

    /// Mean curvature of the coordinate sphere at `s` inside the end.
    pub fn sphere_mean_curvature(&self, s: S) -> Result<S> {
        let u = self.u_jet(s)?;
        let a = S::one() + u.df * u.df;
        Ok(lit::<S>((self.n - 1) as f64) / (s * a.sqrt()))
    }

    /// Coefficients `(c2, c1)` with `Δ_g (f∘r) = c2 f'' + c1 f'` for radial
    /// functions of the extrinsic radius, evaluated at base radius `s`.
    pub fn laplace_coeffs(&self, s: S) -> Result<(S, S)> {
        let u = self.u_jet(s)?;
        let rj = self.r_jet(s)?;
        let a = S::one() + u.df * u.df;
        let ap = lit::<S>(2.0) * u.df * u.d2f;
        let c2 = rj.df * rj.df / a;
        let c1 = rj.d2f / a + rj.df * (lit::<S>((self.n - 1) as f64) / (s * a) - ap / (lit::<S>(2.0) * a * a));
        Ok((c2, c1))
    }

    /// `1/s²` factor multiplying the link eigenvalue in `|∇u|²`.
    pub fn link_scale_at(&self, s: S) -> S {
        S::one() / (s * s)
    }

    /// Area factor: `vol(S_ρ) = area_factor · vol(link)` at base radius `s`.
    pub fn area_factor_at(&self, s: S) -> S {
        s.powi((self.n - 1) as i32)
    }

    /// Residual of the mean-curvature identity `H = ±⟨x,n⟩/2`, with `H`
    /// rebuilt from a Richardson finite difference of the dense `u'` —
    /// independent of the algebraic `u''` route.
    pub fn mean_curvature_residual(&self, s: S, h: S) -> Result<S> {
        let u = self.u_jet(s)?;
        let d1 = {
            let a = self.base.eval(s + h)?[1];
            let b = self.base.eval(s - h)?[1];
            (a - b) / (lit::<S>(2.0) * h)
        };
        let d2 = {
            let h2 = h * lit(0.5);
            let a = self.base.eval(s + h2)?[1];
            let b = self.base.eval(s - h2)?[1];
            (a - b) / (lit::<S>(2.0) * h2)
        };
        let upp_fd = (lit::<S>(4.0) * d2 - d1) / lit(3.0);
        let q = (S::one() + u.df * u.df).sqrt();
        let h_fd = upp_fd / (q * q * q) + lit::<S>((self.n - 1) as f64) * u.df / (s * q);
        let xn = (u.f - s * u.df) / q;
        Ok((h_fd - self.kind.sign::<S>() * xn * lit(0.5)).abs())
    }
}

/// Boundary data for a profile solve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileData<S> {
    /// `(s0, u(s0), u'(s0))`, integrated outward.
    Inner { s0: S, u0: S, du0: S },
    /// Target asymptotic slope `lim u/s`.
    AsymptoticSlope { slope: S },
}

fn ode_options<S: Real>(rel_tol: S) -> OdeOptions<S> {
    OdeOptions { rel_tol, abs_tol: lit(1e-300), ..OdeOptions::default() }
}

/// Solve a profile over `s ∈ [s_lo, s_hi]`.
///
/// Expanders integrate outward from inner data (stable) or shoot on the
/// inner derivative for a target slope. Shrinkers are seeded with the
/// two-term cone expansion at the outer radius and integrated inward,
/// which keeps the `e^{+s²/4}` mode suppressed; shrinker inner data is
/// accepted but only over the short span where outward integration stays
/// graphical.
pub fn solve_profile<S: Real>(
    kind: SelfSimilarKind,
    n: usize,
    data: ProfileData<S>,
    s_lo: S,
    s_hi: S,
    rel_tol: S,
) -> Result<SelfSimilarEnd<S>> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} < 2")));
    }
    let sign = kind.sign::<S>();
    let f = move |s: S, y: &[S; 2]| [y[1], rhs(n, sign, s, y[0], y[1])];
    let opts = ode_options(rel_tol);
    let base = match (kind, data) {
        (_, ProfileData::Inner { s0, u0, du0 }) => {
            let sol = integrate(f, s0, s_hi, [u0, du0], &opts).map_err(|e| match e {
                Error::StepSizeCollapse { at } => {
                    Error::NotGraphical(format!("gradient blow-up near s = {at}"))
                }
                other => other,
            })?;
            sol
        }
        (SelfSimilarKind::Shrinker, ProfileData::AsymptoticSlope { slope }) => {
            // two-term cone expansion: u = σ s + (n-1) σ / s + O(s^{-3})
            let c1 = lit::<S>((n - 1) as f64) * slope;
            let u_seed = slope * s_hi + c1 / s_hi;
            let du_seed = slope - c1 / (s_hi * s_hi);
            integrate(f, s_hi, s_lo, [u_seed, du_seed], &opts)?
        }
        (SelfSimilarKind::Expander, ProfileData::AsymptoticSlope { slope }) => {
            // shoot on the inner height u(s_lo) with du0 = slope; the
            // measured slope at s_hi is monotone increasing in the height
            let measure = |u0: S| -> Result<S> {
                let sol = integrate(f, s_lo, s_hi, [u0, slope], &opts)?;
                Ok(sol.eval(s_hi)?[0] / s_hi)
            };
            let step = S::one() + slope.abs() * s_lo;
            let mut lo = slope * s_lo - step;
            let mut hi = slope * s_lo + step;
            let mut widen = 0;
            while measure(lo)? > slope {
                lo = lo - step;
                widen += 1;
                if widen > 60 {
                    return Err(Error::ShootingBracket("no lower bracket for slope".into()));
                }
            }
            while measure(hi)? < slope {
                hi = hi + step;
                widen += 1;
                if widen > 120 {
                    return Err(Error::ShootingBracket("no upper bracket for slope".into()));
                }
            }
            for _ in 0..80 {
                let mid = (lo + hi) * lit(0.5);
                if measure(mid)? < slope {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            integrate(f, s_lo, s_hi, [(lo + hi) * lit(0.5), slope], &opts)?
        }
    };
    Ok(SelfSimilarEnd { kind, n, base: Rc::new(base) })
}

/// The plane through the origin, an exact solution of both equations.
pub fn flat_plane<S: Real>(kind: SelfSimilarKind, n: usize, s_lo: S, s_hi: S) -> Result<SelfSimilarEnd<S>> {
    solve_profile(kind, n, ProfileData::Inner { s0: s_lo, u0: S::zero(), du0: S::zero() }, s_lo, s_hi, lit(1e-12))
}

/// View a profile as a [`RadialProfile`] in the base radius `s`
/// (columns exported by `to_csv` are then `s, u, u', u''`).
pub fn profile_in_base_radius<S: Real>(end: &SelfSimilarEnd<S>) -> RadialProfile<S> {
    struct Adapter<S>(SelfSimilarEnd<S>);
    impl<S: Real> ProfileFn<S> for Adapter<S> {
        fn jet(&self, s: S) -> Result<Jet<S>> {
            self.0.u_jet(s)
        }
        fn domain(&self) -> (S, S) {
            self.0.s_span()
        }
    }
    RadialProfile::custom(Rc::new(Adapter(end.clone())))
}

/// Seed values of the decaying mode `v ≈ r^{-n-1} e^{-r²/4}` at base radius `s`.
pub fn decaying_mode_seed<S: Real>(end: &SelfSimilarEnd<S>, s: S) -> Result<(S, S)> {
    let rj = end.r_jet(s)?;
    let np1 = lit::<S>((end.n + 1) as f64);
    // log v = -(n+1) ln r - r²/4, kept in the exponent until the last moment
    let logv = -np1 * rj.f.ln() - rj.f * rj.f * lit(0.25);
    let v = logv.exp();
    let dv = v * (-np1 / rj.f - rj.f * lit(0.5)) * rj.df;
    Ok((v, dv))
}

/// Exact difference of two same-kind profiles sharing the stored base:
/// `d = u₂ − u₁` solves `d'' = G(s, u+d, p+q) − G(s, u, p)` expanded in a
/// cancellation-free form. Seeded at `s_seed` and integrated inward.
pub struct PairDifference<S> {
    pub base: SelfSimilarEnd<S>,
    diff: Rc<DenseSolution<S, 2>>,
}

impl<S: Real> PairDifference<S> {
    pub fn diff_span(&self) -> (S, S) {
        self.diff.span()
    }

    /// `(d, d')` at base radius `s`.
    pub fn difference(&self, s: S) -> Result<[S; 2]> {
        self.diff.eval(s)
    }

    /// Difference jet including `d''` from the difference equation.
    pub fn difference_jet(&self, s: S) -> Result<Jet<S>> {
        let [d, q] = self.diff.eval(s)?;
        let u = self.base.u_jet(s)?;
        let sign = self.base.kind.sign();
        let d2 = difference_rhs(self.base.n, sign, s, u.f, u.df, d, q);
        Ok(Jet { f: d, df: q, d2f: d2 })
    }

    /// First-order normal graph height of the second profile over the base.
    pub fn normal_height(&self, s: S) -> Result<S> {
        let [d, _] = self.diff.eval(s)?;
        let u = self.base.u_jet(s)?;
        Ok(d / (S::one() + u.df * u.df).sqrt())
    }

    /// Distance between the two profile circles on the extrinsic sphere of
    /// radius `ρ`, to first order in the difference.
    pub fn sphere_distance(&self, rho: S) -> Result<S> {
        let s = self.base.s_of_r(rho)?;
        let u = self.base.u_jet(s)?;
        let [d, _] = self.diff.eval(s)?;
        Ok(d.abs() * rho / (s + u.f * u.df))
    }

    /// Normal height as a radial profile over the extrinsic radius of the base.
    pub fn height_profile(&self) -> RadialProfile<S> {
        struct HeightFn<S> {
            base: SelfSimilarEnd<S>,
            diff: Rc<DenseSolution<S, 2>>,
        }
        impl<S: Real> ProfileFn<S> for HeightFn<S> {
            fn jet(&self, r: S) -> Result<Jet<S>> {
                let s = self.base.s_of_r(r)?;
                let u = self.base.u_jet(s)?;
                let [d, q] = self.diff.eval(s)?;
                let sign = self.base.kind.sign();
                let n = self.base.n;
                let d2 = difference_rhs(n, sign, s, u.f, u.df, d, q);
                // eta = d / sqrt(A), A = 1 + u'^2
                let a = S::one() + u.df * u.df;
                let upp = u.d2f;
                let uppp = rhs_total_derivative(n, sign, s, u.f, u.df, upp);
                let ap = lit::<S>(2.0) * u.df * upp;
                let app = lit::<S>(2.0) * (upp * upp + u.df * uppp);
                let sa = a.sqrt();
                let eta = d / sa;
                let etap = q / sa - d * ap / (lit::<S>(2.0) * a * sa);
                let etapp = d2 / sa - q * ap / (a * sa)
                    + d * (lit::<S>(0.75) * ap * ap / (a * a * sa) - app / (lit::<S>(2.0) * a * sa));
                // chain rule to the extrinsic radius
                let rj = self.base.r_jet(s)?;
                let df = etap / rj.df;
                let d2f = (etapp - df * rj.d2f) / (rj.df * rj.df);
                Ok(Jet { f: eta, df, d2f })
            }
            fn domain(&self) -> (S, S) {
                let (lo, hi) = self.diff.span();
                let r_lo = self.base.r_jet(lo).map(|j| j.f).unwrap_or(lo);
                let r_hi = self.base.r_jet(hi).map(|j| j.f).unwrap_or(hi);
                (r_lo, r_hi)
            }
        }
        RadialProfile::custom(Rc::new(HeightFn { base: self.base.clone(), diff: self.diff.clone() }))
    }
}

fn difference_rhs<S: Real>(n: usize, sign: S, s: S, u: S, p: S, d: S, q: S) -> S {
    let dk = curvature_term(n, sign, s, d, q);
    let k2 = curvature_term(n, sign, s, u + d, p + q);
    -(S::one() + p * p) * dk - (lit::<S>(2.0) * p * q + q * q) * k2
}

/// Build the same-cone companion at amplitude `a` on the decaying mode,
/// seeded at `s_seed` and carried inward to `s_lo` along the base.
pub fn seeded_pair<S: Real>(
    base: &SelfSimilarEnd<S>,
    amplitude: S,
    s_seed: S,
    s_lo: S,
    rel_tol: S,
) -> Result<PairDifference<S>> {
    let (v, dv) = decaying_mode_seed(base, s_seed)?;
    let n = base.n;
    let sign = base.kind.sign::<S>();
    let b = base.clone();
    let f = move |s: S, y: &[S; 2]| {
        let [u, p] = b.base.eval(s).expect("difference stays inside base span");
        [y[1], difference_rhs(n, sign, s, u, p, y[0], y[1])]
    };
    let opts = ode_options(rel_tol);
    let diff = if amplitude.is_zero() {
        // zero seed: the difference equation preserves d ≡ 0 exactly
        integrate(f, s_seed, s_lo, [S::zero(), S::zero()], &opts)?
    } else {
        integrate(f, s_seed, s_lo, [amplitude * v, amplitude * dv], &opts)?
    };
    Ok(PairDifference { base: base.clone(), diff: Rc::new(diff) })
}

/// Linearized decaying mode about a base profile (the exact linearization,
/// quadratic terms dropped), seeded at `s_seed`, integrated inward.
pub fn linearized_decaying_mode<S: Real>(
    base: &SelfSimilarEnd<S>,
    s_seed: S,
    s_lo: S,
    rel_tol: S,
) -> Result<PairDifference<S>> {
    let (v, dv) = decaying_mode_seed(base, s_seed)?;
    let n = base.n;
    let sign = base.kind.sign::<S>();
    let b = base.clone();
    let f = move |s: S, y: &[S; 2]| {
        let [u, p] = b.base.eval(s).expect("mode stays inside base span");
        let k = curvature_term(n, sign, s, u, p);
        let dk = curvature_term(n, sign, s, y[0], y[1]);
        [y[1], -(S::one() + p * p) * dk - lit::<S>(2.0) * p * y[1] * k]
    };
    let diff = integrate(f, s_seed, s_lo, [v, dv], &ode_options(rel_tol))?;
    Ok(PairDifference { base: base.clone(), diff: Rc::new(diff) })
}

/// Direct graph difference of two independently solved profiles of the same
/// kind (plain subtraction; adequate while the difference stays well above
/// float resolution relative to the profiles).
pub struct DirectDifference<S> {
    pub base: SelfSimilarEnd<S>,
    pub other: SelfSimilarEnd<S>,
}

impl<S: Real> DirectDifference<S> {
    pub fn new(base: &SelfSimilarEnd<S>, other: &SelfSimilarEnd<S>) -> Result<Self> {
        if base.kind != other.kind {
            return Err(Error::Domain("profiles of different kinds".into()));
        }
        if base.n != other.n {
            return Err(Error::Domain("profiles of different dimensions".into()));
        }
        let (a1, b1) = base.s_span();
        let (a2, b2) = other.s_span();
        if a1.max(a2) >= b1.min(b2) {
            return Err(Error::Domain("profile domains do not overlap".into()));
        }
        Ok(Self { base: base.clone(), other: other.clone() })
    }

    pub fn overlap(&self) -> (S, S) {
        let (a1, b1) = self.base.s_span();
        let (a2, b2) = self.other.s_span();
        (a1.max(a2), b1.min(b2))
    }

    pub fn difference_jet(&self, s: S) -> Result<Jet<S>> {
        let u1 = self.base.u_jet(s)?;
        let u2 = self.other.u_jet(s)?;
        Ok(Jet { f: u2.f - u1.f, df: u2.df - u1.df, d2f: u2.d2f - u1.d2f })
    }

    pub fn normal_height(&self, s: S) -> Result<S> {
        let u1 = self.base.u_jet(s)?;
        let d = self.difference_jet(s)?;
        Ok(d.f / (S::one() + u1.df * u1.df).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinking_sphere_is_exact() {
        // lower hemisphere of the sphere of radius sqrt(2n): u = -sqrt(2n - s²)
        for n in [2usize, 3] {
            let r2 = 2.0 * n as f64;
            let s = 0.7 * r2.sqrt();
            let u = -(r2 - s * s).sqrt();
            let p = -s / u;
            let res = rhs(n, -1.0, s, u, p) - {
                // analytic u'' for the sphere
                -(r2) / (u * u * u)
            };
            assert!(res.abs() < 1e-12, "n={n}: residual {res}");
        }
    }

    #[test]
    fn plane_is_exact_for_both_kinds() {
        for kind in [SelfSimilarKind::Shrinker, SelfSimilarKind::Expander] {
            let end = flat_plane::<f64>(kind, 3, 1.0, 30.0).unwrap();
            let j = end.u_jet(17.3).unwrap();
            assert_eq!(j.f, 0.0);
            assert_eq!(j.df, 0.0);
            assert_eq!(j.d2f, 0.0);
        }
    }

    #[test]
    fn expander_ivp_slope_converges_quadratically() {
        // inner data (1, 0.5, 0.5): u/s approaches a slope with O(s^-2) gap
        let end = solve_profile(
            SelfSimilarKind::Expander,
            2,
            ProfileData::Inner { s0: 1.0, u0: 0.5, du0: 0.5 },
            1.0,
            400.0,
            1e-12,
        )
        .unwrap();
        let slope: f64 = end.u_jet(400.0).unwrap().f / 400.0;
        for &s in &[50.0, 100.0, 200.0] {
            let gap: f64 = (end.u_jet(s).unwrap().f / s - slope) * s * s;
            assert!(gap.abs() < 2.0, "s={s}: scaled gap {gap}");
        }
    }

    #[test]
    fn expander_slope_shooting() {
        let target = 0.8;
        let end = solve_profile(
            SelfSimilarKind::Expander,
            3,
            ProfileData::AsymptoticSlope { slope: target },
            2.0,
            120.0,
            1e-11,
        )
        .unwrap();
        let measured: f64 = end.u_jet(120.0).unwrap().f / 120.0;
        assert!((measured - target).abs() < 1e-8, "measured {measured}");
    }

    #[test]
    fn shrinker_inward_from_cone_data() {
        let end = solve_profile(
            SelfSimilarKind::Shrinker,
            2,
            ProfileData::AsymptoticSlope { slope: 0.5 },
            8.0,
            45.0,
            1e-11,
        )
        .unwrap();
        // mean-curvature self-check against the finite-difference oracle
        for &s in &[10.0, 20.0, 35.0] {
            let res = end.mean_curvature_residual(s, 1e-3).unwrap();
            assert!(res < 1e-7, "s={s}: residual {res}");
        }
        // stays near the cone
        let u = end.u_jet(40.0).unwrap();
        assert!((u.f / 40.0 - 0.5f64).abs() < 0.01);
    }

    #[test]
    fn zero_amplitude_pair_is_identically_zero() {
        let base = solve_profile(
            SelfSimilarKind::Expander,
            2,
            ProfileData::Inner { s0: 4.0, u0: 2.0, du0: 0.55 },
            4.0,
            40.0,
            1e-11,
        )
        .unwrap();
        let pair = seeded_pair(&base, 0.0, 30.0, 5.0, 1e-11).unwrap();
        for &s in &[6.0, 11.0, 25.0] {
            let [d, q] = pair.difference(s).unwrap();
            assert_eq!(d, 0.0);
            assert_eq!(q, 0.0);
        }
    }

    #[test]
    fn seeded_pair_tracks_decaying_mode_magnitude() {
        let base = solve_profile(
            SelfSimilarKind::Expander,
            2,
            ProfileData::Inner { s0: 4.0, u0: 2.0, du0: 0.55 },
            4.0,
            40.0,
            1e-11,
        )
        .unwrap();
        let pair = seeded_pair(&base, 1.0, 30.0, 5.0, 1e-11).unwrap();
        // at the seed the difference matches the mode; inward it grows like
        // the mode (superexponentially), staying positive
        let (v_seed, _) = decaying_mode_seed(&base, 30.0).unwrap();
        let [d, _] = pair.difference(30.0).unwrap();
        assert!((d / v_seed - 1.0f64).abs() < 1e-12);
        let [d8, _] = pair.difference(8.0).unwrap();
        assert!(d8 > d * 1e10, "mode should grow inward: {d8} vs {d}");
    }
}
