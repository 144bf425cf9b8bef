//! Computable models of weakly conical ends and their certification.
//!
//! Every model is rotationally symmetric, so the two defining bounds
//! `||∇r| − 1| ≤ Λ r⁻⁴ ≤ ½` and `|∇²r² − 2g| ≤ Λ r⁻² ≤ ½` reduce to scalar
//! functions of the radius, evaluated from closed forms (warped cones) or
//! from profile jets (self-similar ends). The tensor norm is the Frobenius
//! norm in a `g`-orthonormal frame.

use crate::error::{Error, Result};
use crate::link::{LinkMode, LinkSpec};
use crate::scalar::{lit, Real};
use crate::selfsimilar::{self, ProfileData, SelfSimilarEnd, SelfSimilarKind};
use serde::{Deserialize, Serialize};
use std::rc::Rc;

#[derive(Clone, Debug)]
pub enum EndShape<S> {
    /// `g = dr² + r² g_L`; satisfies the bounds with `Λ = 0`.
    ExactCone,
    /// Warp `h(r) = r² + δ`: `|∇r| = 1` exactly, `∇²r² − 2g = −2δ g_L`.
    PerturbedCone { delta: S },
    /// Warp `h(r) = r²(1 + δ r^{-decay})`, `decay ≥ 2`.
    PowerPerturbedCone { delta: S, decay: S },
    /// End of a rotationally symmetric self-shrinker or self-expander.
    SelfSimilar(Rc<SelfSimilarEnd<S>>),
}

impl<S: Real> EndShape<S> {
    /// `(h, h')` for the warped-product family; `None` for self-similar ends.
    pub fn warp(&self, r: S) -> Option<(S, S)> {
        let two = lit::<S>(2.0);
        match self {
            EndShape::ExactCone => Some((r * r, two * r)),
            EndShape::PerturbedCone { delta } => Some((r * r + *delta, two * r)),
            EndShape::PowerPerturbedCone { delta, decay } => {
                let h = r * r * (S::one() + *delta * r.powf(-*decay));
                let hp = two * r + (two - *decay) * *delta * r.powf(S::one() - *decay);
                Some((h, hp))
            }
            EndShape::SelfSimilar(_) => None,
        }
    }

    pub fn is_exact_cone(&self) -> bool {
        matches!(self, EndShape::ExactCone)
    }
}

/// Pointwise data on the sphere `S_ρ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SphereData<S> {
    pub area: S,
    pub mean_curvature: S,
    pub grad_r: S,
    /// `|∂_r − N|`
    pub gap_dr_n: S,
    /// `|∂_r − r⁻¹X|`
    pub gap_dr_x: S,
    /// `|N − r⁻¹X|`
    pub gap_n_x: S,
}

/// Outcome of grid certification.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport<S> {
    pub lambda: S,
    pub sup_grad: S,
    pub sup_grad_at: S,
    pub sup_hess: S,
    pub sup_hess_at: S,
    /// Sup on the coarse grid before the 2x refinement.
    pub coarse_sup: S,
    pub passed: bool,
    /// Binding cap `min(r_inner⁴, r_inner²)/2`.
    pub cap: S,
    pub grid_points: usize,
}

#[derive(Clone, Debug)]
pub struct WeaklyConicalEnd<S> {
    pub n: usize,
    pub r_inner: S,
    pub r_outer: S,
    pub link: LinkSpec<S>,
    pub shape: EndShape<S>,
    /// Certified constant from [`certify_weakly_conical`].
    pub lambda: S,
    pub certification: CertificationReport<S>,
}

impl<S: Real> WeaklyConicalEnd<S> {
    pub fn grad_r(&self, r: S) -> Result<S> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                ss.grad_r(s)
            }
            _ => Ok(S::one()),
        }
    }

    /// Frobenius norm of `∇²r² − 2g` at radius `r`.
    pub fn hessian_gap(&self, r: S) -> Result<S> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                ss.hessian_gap(s)
            }
            shape => {
                let (h, hp) = shape.warp(r).expect("warped shape");
                let two = lit::<S>(2.0);
                let link_part = r * hp / h - two;
                Ok(link_part.abs() * lit::<S>((self.n - 1) as f64).sqrt())
            }
        }
    }

    /// Area factor: `vol(S_r) = area_factor(r) · vol(link)`.
    pub fn area_factor(&self, r: S) -> Result<S> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                Ok(ss.area_factor_at(s))
            }
            shape => {
                let (h, _) = shape.warp(r).expect("warped shape");
                Ok(h.powf(lit::<S>((self.n - 1) as f64) / lit(2.0)))
            }
        }
    }

    /// Factor multiplying the link eigenvalue in `|∇u|²` (i.e. `1/h`).
    pub fn link_scale(&self, r: S) -> Result<S> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                Ok(ss.link_scale_at(s))
            }
            shape => {
                let (h, _) = shape.warp(r).expect("warped shape");
                Ok(S::one() / h)
            }
        }
    }

    /// Coefficients `(c2, c1)` of `Δ_g (f∘r) = c2 f'' + c1 f'`.
    pub fn laplace_coeffs(&self, r: S) -> Result<(S, S)> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                ss.laplace_coeffs(s)
            }
            shape => {
                let (h, hp) = shape.warp(r).expect("warped shape");
                Ok((S::one(), lit::<S>((self.n - 1) as f64) * hp / (lit::<S>(2.0) * h)))
            }
        }
    }

    pub fn mean_curvature(&self, r: S) -> Result<S> {
        match &self.shape {
            EndShape::SelfSimilar(ss) => {
                let s = ss.s_of_r(r)?;
                ss.sphere_mean_curvature(s)
            }
            shape => {
                let (h, hp) = shape.warp(r).expect("warped shape");
                Ok(lit::<S>((self.n - 1) as f64) * hp / (lit::<S>(2.0) * h))
            }
        }
    }

    pub fn sphere_data(&self, rho: S) -> Result<SphereData<S>> {
        if rho < self.r_inner {
            return Err(Error::Domain(format!(
                "rho = {rho} below inner radius {}",
                self.r_inner
            )));
        }
        let g = self.grad_r(rho)?;
        let e = (g - S::one()).abs();
        Ok(SphereData {
            area: self.area_factor(rho)? * self.link.volume(),
            mean_curvature: self.mean_curvature(rho)?,
            grad_r: g,
            gap_dr_n: e,
            gap_dr_x: (g * g - S::one()).abs() / g,
            gap_n_x: e / g,
        })
    }

    pub fn constant_mode(&self) -> LinkMode<S> {
        self.link.constant_mode()
    }

    pub fn mode(&self, l: u32) -> LinkMode<S> {
        self.link.normalized_mode(l)
    }
}

/// Sup of the two scaled deviations over a geometric grid with a 2x
/// refinement pass; the reported `Λ` is the refined sup times 1.05.
pub fn certify_weakly_conical<S: Real>(
    shape: &EndShape<S>,
    n: usize,
    r_lo: S,
    r_hi: S,
    samples: usize,
) -> Result<CertificationReport<S>> {
    if samples < 100 {
        return Err(Error::Domain("certification grid needs at least 100 samples".into()));
    }
    let probe = WeaklyConicalEnd {
        n,
        r_inner: r_lo,
        r_outer: r_hi,
        link: LinkSpec::round_sphere(n - 1, S::one()),
        shape: shape.clone(),
        lambda: S::zero(),
        certification: empty_report(),
    };
    let sup_on = |count: usize| -> Result<(S, S, S, S)> {
        let mut sup_grad = S::zero();
        let mut sup_grad_at = r_lo;
        let mut sup_hess = S::zero();
        let mut sup_hess_at = r_lo;
        let ratio = (r_hi / r_lo).powf(S::one() / lit((count - 1) as f64));
        let mut r = r_lo;
        for _ in 0..count {
            let g = (probe.grad_r(r)? - S::one()).abs() * r.powi(4);
            if g > sup_grad {
                sup_grad = g;
                sup_grad_at = r;
            }
            let hgap = probe.hessian_gap(r)? * r * r;
            if hgap > sup_hess {
                sup_hess = hgap;
                sup_hess_at = r;
            }
            r = r * ratio;
        }
        Ok((sup_grad, sup_grad_at, sup_hess, sup_hess_at))
    };

    let (lambda, sup_grad, sup_grad_at, sup_hess, sup_hess_at, coarse) = if shape.is_exact_cone() {
        (S::zero(), S::zero(), r_lo, S::zero(), r_lo, S::zero())
    } else {
        let (cg, _, ch, _) = sup_on(samples)?;
        let coarse = cg.max(ch);
        let (sg, sga, sh, sha) = sup_on(samples * 2)?;
        let lambda = sg.max(sh) * lit(1.05);
        (lambda, sg, sga, sh, sha, coarse)
    };

    let half = lit::<S>(0.5);
    let cap = (r_lo.powi(4).min(r_lo * r_lo)) * half;
    // the defining inequalities must also cap at 1/2, worst at r_inner
    let passed = sup_grad <= half * r_lo.powi(4) && sup_hess <= half * r_lo * r_lo;
    Ok(CertificationReport {
        lambda,
        sup_grad,
        sup_grad_at,
        sup_hess,
        sup_hess_at,
        coarse_sup: coarse,
        passed,
        cap,
        grid_points: samples,
    })
}

fn empty_report<S: Real>() -> CertificationReport<S> {
    CertificationReport {
        lambda: S::zero(),
        sup_grad: S::zero(),
        sup_grad_at: S::zero(),
        sup_hess: S::zero(),
        sup_hess_at: S::zero(),
        coarse_sup: S::zero(),
        passed: true,
        cap: S::zero(),
        grid_points: 0,
    }
}

/// Serializable description of an end, the input to [`build_end`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndConfig<S> {
    pub n: usize,
    pub r_inner: S,
    pub r_outer: S,
    pub link_radius: S,
    pub shape: ShapeConfig<S>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig<S> {
    ExactCone,
    PerturbedCone { delta: S },
    PowerPerturbedCone { delta: S, decay: S },
    /// Expander end from inner data, carried out to `s_max`.
    ExpanderInner { s0: S, u0: S, du0: S, s_max: S },
    /// Expander end shot to a target asymptotic slope.
    ExpanderSlope { slope: S, s0: S, s_max: S },
    /// Shrinker end seeded on the cone expansion at `s_max`, carried inward.
    ShrinkerSlope { slope: S, s_min: S, s_max: S },
}

/// Construct and certify an end; construction fails if certification does.
pub fn build_end<S: Real>(config: &EndConfig<S>) -> Result<WeaklyConicalEnd<S>> {
    if config.n < 2 {
        return Err(Error::Domain(format!("dimension n = {} < 2", config.n)));
    }
    if config.r_inner < S::one() || config.r_outer <= config.r_inner {
        return Err(Error::Domain(format!(
            "need 1 <= r_inner < r_outer, got [{}, {}]",
            config.r_inner, config.r_outer
        )));
    }
    let shape = match &config.shape {
        ShapeConfig::ExactCone => EndShape::ExactCone,
        ShapeConfig::PerturbedCone { delta } => EndShape::PerturbedCone { delta: *delta },
        ShapeConfig::PowerPerturbedCone { delta, decay } => {
            if *decay < lit(2.0) {
                return Err(Error::Domain("power perturbation needs decay >= 2".into()));
            }
            EndShape::PowerPerturbedCone { delta: *delta, decay: *decay }
        }
        ShapeConfig::ExpanderInner { s0, u0, du0, s_max } => {
            let ss = selfsimilar::solve_profile(
                SelfSimilarKind::Expander,
                config.n,
                ProfileData::Inner { s0: *s0, u0: *u0, du0: *du0 },
                *s0,
                *s_max,
                lit(1e-10),
            )?;
            EndShape::SelfSimilar(Rc::new(ss))
        }
        ShapeConfig::ExpanderSlope { slope, s0, s_max } => {
            let ss = selfsimilar::solve_profile(
                SelfSimilarKind::Expander,
                config.n,
                ProfileData::AsymptoticSlope { slope: *slope },
                *s0,
                *s_max,
                lit(1e-10),
            )?;
            EndShape::SelfSimilar(Rc::new(ss))
        }
        ShapeConfig::ShrinkerSlope { slope, s_min, s_max } => {
            let ss = selfsimilar::solve_profile(
                SelfSimilarKind::Shrinker,
                config.n,
                ProfileData::AsymptoticSlope { slope: *slope },
                *s_min,
                *s_max,
                lit(1e-10),
            )?;
            EndShape::SelfSimilar(Rc::new(ss))
        }
    };

    // self-similar models must cover the requested extrinsic range
    let (cert_lo, cert_hi) = match &shape {
        EndShape::SelfSimilar(ss) => {
            let (r_lo, r_hi) = ss.r_span()?;
            if r_lo > config.r_inner || r_hi < config.r_outer {
                return Err(Error::Domain(format!(
                    "profile covers extrinsic [{r_lo}, {r_hi}], requested [{}, {}]",
                    config.r_inner, config.r_outer
                )));
            }
            (config.r_inner, config.r_outer)
        }
        _ => (config.r_inner, config.r_outer),
    };

    let report = certify_weakly_conical(&shape, config.n, cert_lo, cert_hi, 400)?;
    if !report.passed {
        let (value, at, quantity, cap) = if report.sup_grad > report.sup_hess {
            (report.sup_grad, report.sup_grad_at, "r^4 ||grad r| - 1|", cert_lo.powi(4) * lit(0.5))
        } else {
            (report.sup_hess, report.sup_hess_at, "r^2 |Hess r^2 - 2g|", cert_lo * cert_lo * lit(0.5))
        };
        return Err(Error::CertificationFailed {
            radius: at.to_f64().unwrap_or(f64::NAN),
            quantity,
            value: value.to_f64().unwrap_or(f64::NAN),
            cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut link = LinkSpec::round_sphere(config.n - 1, config.link_radius);
    link.modes.push(link.constant_mode());
    Ok(WeaklyConicalEnd {
        n: config.n,
        r_inner: config.r_inner,
        r_outer: config.r_outer,
        link,
        shape,
        lambda: report.lambda,
        certification: report,
    })
}

/// Exact cone over a unit round sphere, the workhorse model.
pub fn exact_cone<S: Real>(n: usize, r_inner: S, r_outer: S) -> WeaklyConicalEnd<S> {
    build_end(&EndConfig {
        n,
        r_inner,
        r_outer,
        link_radius: S::one(),
        shape: ShapeConfig::ExactCone,
    })
    .expect("exact cone always certifies")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cone_certifies_with_zero_lambda() {
        let end = exact_cone::<f64>(3, 1.0, 50.0);
        assert_eq!(end.lambda, 0.0);
        assert!(end.certification.passed);
    }

    #[test]
    fn exact_cone_sphere_data() {
        let end = exact_cone::<f64>(3, 1.0, 50.0);
        let d = end.sphere_data(5.0).unwrap();
        assert!((d.area - 4.0 * std::f64::consts::PI * 25.0).abs() < 1e-10);
        assert!((d.mean_curvature - 2.0 / 5.0).abs() < 1e-14);
        assert_eq!(d.grad_r, 1.0);
        assert_eq!(d.gap_dr_n, 0.0);
        assert_eq!(d.gap_dr_x, 0.0);
        assert_eq!(d.gap_n_x, 0.0);
    }

    #[test]
    fn perturbed_cone_lambda_matches_closed_form() {
        // Hess gap is exactly -2 delta g_L: Lambda -> 2 sqrt(n-1) delta
        let n = 3;
        let delta = 0.1;
        let end = build_end(&EndConfig::<f64> {
            n,
            r_inner: 1.0,
            r_outer: 60.0,
            link_radius: 1.0,
            shape: ShapeConfig::PerturbedCone { delta },
        })
        .unwrap();
        let expect = 2.0 * ((n - 1) as f64).sqrt() * delta;
        assert!(
            (end.lambda / expect - 1.0).abs() < 0.05,
            "lambda {} vs closed form {expect}",
            end.lambda
        );
    }

    #[test]
    fn perturbed_cone_mean_curvature_bound() {
        let n = 3;
        let delta = 0.1;
        let end = build_end(&EndConfig::<f64> {
            n,
            r_inner: 1.0,
            r_outer: 60.0,
            link_radius: 1.0,
            shape: ShapeConfig::PerturbedCone { delta },
        })
        .unwrap();
        let rho = 5.0;
        let d = end.sphere_data(rho).unwrap();
        let h = rho * rho + delta;
        assert!((d.mean_curvature - (n - 1) as f64 * 2.0 * rho / (2.0 * h)).abs() < 1e-14);
        let gap = (d.mean_curvature - (n - 1) as f64 / rho).abs();
        assert!(gap <= 2.0 * delta / rho.powi(3) * (n - 1) as f64);
    }

    #[test]
    fn oversized_perturbation_fails_with_diagnostic() {
        let r = build_end(&EndConfig {
            n: 3,
            r_inner: 1.0,
            r_outer: 40.0,
            link_radius: 1.0,
            shape: ShapeConfig::PerturbedCone { delta: 0.5 },
        });
        match r {
            Err(Error::CertificationFailed { value, cap, .. }) => {
                assert!(value > cap);
            }
            other => panic!("expected certification failure, got {other:?}"),
        }
    }

    #[test]
    fn expander_end_certifies() {
        let end = build_end(&EndConfig::<f64> {
            n: 2,
            r_inner: 10.0,
            r_outer: 40.0,
            link_radius: 1.0,
            shape: ShapeConfig::ExpanderSlope { slope: 1.0, s0: 2.0, s_max: 60.0 },
        })
        .unwrap();
        assert!(end.lambda > 0.0 && end.lambda.is_finite());
        assert!(end.certification.passed);
        // sphere-gap invariants from the certified constant
        for &rho in &[12.0, 20.0, 33.0] {
            let d = end.sphere_data(rho).unwrap();
            let lam = end.lambda;
            assert!(d.gap_dr_n <= 2.0 * lam / rho.powi(4));
            assert!(d.gap_dr_x <= 6.0 * lam / rho.powi(4));
            assert!(d.gap_n_x <= 4.0 * lam / rho.powi(4));
        }
        // O(rho^{-3}) mean-curvature gap, scaled
        for &rho in &[16.0, 32.0] {
            let d = end.sphere_data(rho).unwrap();
            let scaled = (d.mean_curvature - (end.n - 1) as f64 / rho).abs() * rho.powi(3);
            assert!(scaled < 20.0, "scaled H gap {scaled}");
        }
    }

    #[test]
    fn lambda_monotone_in_inner_radius() {
        let shape = EndShape::<f64>::PowerPerturbedCone { delta: 0.3, decay: 2.0 };
        let a = certify_weakly_conical(&shape, 3, 2.0, 40.0, 200).unwrap();
        let b = certify_weakly_conical(&shape, 3, 8.0, 40.0, 200).unwrap();
        assert!(b.lambda <= a.lambda * 1.0000001);
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let cfg = EndConfig {
            n: 3,
            r_inner: 1.0,
            r_outer: 10.0,
            link_radius: 1.0,
            shape: ShapeConfig::PerturbedCone { delta: 0.1 },
        };
        let s = serde_json::to_string(&cfg).unwrap();
        let back: EndConfig<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(format!("{back:?}"), format!("{cfg:?}"));
        let bad = r#"{"n":3,"r_inner":1.0,"r_outer":10.0,"link_radius":1.0,"surprise":1,
                      "shape":{"model":"exact_cone"}}"#;
        assert!(serde_json::from_str::<EndConfig<f64>>(bad).is_err());
    }
}
