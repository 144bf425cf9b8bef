//! Link cross-sections and their spectral mode data.
//!
//! The lab only needs a link through a handful of constants per selected
//! eigenfunction `a`: the Laplace eigenvalue and the squared norms of `a`
//! and `∇a`. All surface integrals then factor through these.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LinkKind<S> {
    RoundSphere { radius: S },
    RoundCircle { radius: S },
}

/// One link eigenfunction summarized by its Rayleigh data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkMode<S> {
    pub index: u32,
    pub eigenvalue: S,
    pub norm_sq: S,
    pub grad_norm_sq: S,
}

impl<S: Real> LinkMode<S> {
    /// Rayleigh-quotient consistency `μ = ‖∇a‖²/‖a‖²`.
    pub fn validate(&self) -> Result<()> {
        let lhs = self.eigenvalue * self.norm_sq;
        let tol = lit::<S>(1e-10) * (S::one() + lhs.abs() + self.grad_norm_sq.abs());
        if (lhs - self.grad_norm_sq).abs() > tol {
            return Err(Error::Domain(format!(
                "mode {}: eigenvalue {} inconsistent with norms ({} vs {})",
                self.index, self.eigenvalue, lhs, self.grad_norm_sq
            )));
        }
        Ok(())
    }
}

/// Cross-section of dimension `n-1` with a table of selected modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec<S> {
    /// Link dimension, `n - 1`.
    pub dim: usize,
    pub kind: LinkKind<S>,
    pub modes: Vec<LinkMode<S>>,
}

/// Surface volume of the unit sphere `S^d`.
pub fn unit_sphere_volume<S: Real>(d: usize) -> S {
    // omega_d = 2 pi^{(d+1)/2} / Gamma((d+1)/2), by the half-integer recursion
    let pi = S::PI();
    let half = (d + 1) as f64 / 2.0;
    let mut gamma = if (d + 1) % 2 == 0 {
        S::one() // Gamma(1) = 1, integer case starts at 1
    } else {
        pi.sqrt() // Gamma(1/2) = sqrt(pi)
    };
    let mut x = if (d + 1) % 2 == 0 { 1.0 } else { 0.5 };
    while x + 1.0 <= half + 1e-9 {
        gamma = gamma * lit(x);
        x += 1.0;
    }
    lit::<S>(2.0) * pi.powf(lit(half)) / gamma
}

impl<S: Real> LinkSpec<S> {
    pub fn round_sphere(dim: usize, radius: S) -> Self {
        Self { dim, kind: LinkKind::RoundSphere { radius }, modes: Vec::new() }
    }

    pub fn round_circle(radius: S) -> Self {
        Self { dim: 1, kind: LinkKind::RoundCircle { radius }, modes: Vec::new() }
    }

    pub fn radius(&self) -> S {
        match self.kind {
            LinkKind::RoundSphere { radius } | LinkKind::RoundCircle { radius } => radius,
        }
    }

    /// Volume of the link with its reference metric.
    pub fn volume(&self) -> S {
        let c = self.radius();
        match self.kind {
            LinkKind::RoundSphere { .. } => unit_sphere_volume::<S>(self.dim) * c.powi(self.dim as i32),
            LinkKind::RoundCircle { .. } => lit::<S>(2.0) * S::PI() * c,
        }
    }

    /// Laplace eigenvalue of the degree-`l` mode.
    pub fn eigenvalue(&self, l: u32) -> S {
        let c = self.radius();
        let lf = lit::<S>(l as f64);
        match self.kind {
            // sphere S^{dim}(c): l (l + dim - 1) / c²
            LinkKind::RoundSphere { .. } => lf * (lf + lit(self.dim as f64 - 1.0)) / (c * c),
            LinkKind::RoundCircle { .. } => lf * lf / (c * c),
        }
    }

    /// The constant eigenfunction `a ≡ 1`.
    pub fn constant_mode(&self) -> LinkMode<S> {
        LinkMode {
            index: 0,
            eigenvalue: S::zero(),
            norm_sq: self.volume(),
            grad_norm_sq: S::zero(),
        }
    }

    /// Degree-`l` mode normalized to `‖a‖² = 1`.
    pub fn normalized_mode(&self, l: u32) -> LinkMode<S> {
        let mu = self.eigenvalue(l);
        LinkMode { index: l, eigenvalue: mu, norm_sq: S::one(), grad_norm_sq: mu }
    }

    /// Add a mode to the table (validated).
    pub fn with_mode(mut self, mode: LinkMode<S>) -> Result<Self> {
        mode.validate()?;
        self.modes.push(mode);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((unit_sphere_volume::<f64>(1) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_sphere_volume::<f64>(2) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_sphere_volume::<f64>(3) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn sphere_eigenvalues() {
        // S^2 unit: l(l+1)
        let link = LinkSpec::round_sphere(2, 1.0_f64);
        assert_eq!(link.eigenvalue(1), 2.0);
        assert_eq!(link.eigenvalue(2), 6.0);
        // circle radius c: k^2/c^2
        let link = LinkSpec::round_circle(2.0_f64);
        assert_eq!(link.eigenvalue(3), 9.0 / 4.0);
    }

    #[test]
    fn rayleigh_consistency_enforced() {
        let bad = LinkMode { index: 1, eigenvalue: 2.0_f64, norm_sq: 1.0, grad_norm_sq: 3.0 };
        assert!(bad.validate().is_err());
        let good = LinkSpec::round_sphere(2, 1.0_f64).normalized_mode(2);
        assert!(good.validate().is_ok());
    }
}
