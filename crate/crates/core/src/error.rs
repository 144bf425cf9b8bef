//! Error types shared across the lab.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (best {best:e}, error bound {error:e})")]
    QuadratureNonConvergent { best: f64, error: f64 },

    #[error("ODE step size collapsed at r = {at}")]
    StepSizeCollapse { at: f64 },

    #[error("asymptotic series not decreasing at R = {at}; use a larger seed radius")]
    SeriesNotDecreasing { at: f64 },

    #[error("certification failed at r = {radius}: {quantity} = {value:e} exceeds cap {cap:e}")]
    CertificationFailed {
        radius: f64,
        quantity: &'static str,
        value: f64,
        cap: f64,
    },

    #[error("function is trivial on the tail (B vanished)")]
    Trivial,

    #[error("tail not Gaussian-integrable (estimated growth exponent {quad_coeff})")]
    NotIntegrable { quad_coeff: f64 },

    #[error("residual profile diverges (growth exponent ~ {exponent})")]
    ResidualDiverges { exponent: f64 },

    #[error("graphical representation failed: {0}")]
    NotGraphical(String),

    #[error("shooting bracket not found: {0}")]
    ShootingBracket(String),

    #[error("non-convergent limit: {0}")]
    NonConvergent(String),

    #[error("sign changes in fit window (oscillation)")]
    Oscillation,

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
