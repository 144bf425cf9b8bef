//! Small least-squares helpers used by the rate and limit extractors.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Ordinary least squares on pairs `(x, y)`: returns `(slope, intercept)`.
pub fn linear_fit<S: Real>(pts: &[(S, S)]) -> (S, S) {
    let n = lit::<S>(pts.len() as f64);
    let mut sx = S::zero();
    let mut sy = S::zero();
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for &(x, y) in pts {
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Coefficient of determination for a fitted model `y ≈ ŷ`.
pub fn r_squared<S: Real>(ys: &[S], fitted: &[S]) -> S {
    let n = lit::<S>(ys.len() as f64);
    let mean = ys.iter().fold(S::zero(), |a, &b| a + b) / n;
    let mut ss_res = S::zero();
    let mut ss_tot = S::zero();
    for (&y, &f) in ys.iter().zip(fitted) {
        ss_res = ss_res + (y - f) * (y - f);
        ss_tot = ss_tot + (y - mean) * (y - mean);
    }
    if ss_tot.is_zero() {
        S::one()
    } else {
        S::one() - ss_res / ss_tot
    }
}

/// Fit of a log-magnitude profile against `β r² + α ln r + c`.
#[derive(Clone, Copy, Debug)]
pub struct LogQuadFit<S> {
    pub alpha: S,
    pub beta: S,
    pub constant: S,
    /// RMS of the fit residuals in log scale.
    pub residual_rms: S,
}

/// Least squares for `(r, log|v|)` samples on the basis `{r², ln r, 1}`.
pub fn fit_log_quadratic<S: Real>(samples: &[(S, S)]) -> Result<LogQuadFit<S>> {
    if samples.len() < 4 {
        return Err(Error::Precondition("log-quadratic fit needs >= 4 samples".into()));
    }
    // normal equations for the 3-parameter basis, solved by Cramer's rule
    let mut a = [[S::zero(); 3]; 3];
    let mut b = [S::zero(); 3];
    for &(r, y) in samples {
        let basis = [r * r, r.ln(), S::one()];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = a[i][j] + basis[i] * basis[j];
            }
            b[i] = b[i] + basis[i] * y;
        }
    }
    let det = |m: &[[S; 3]; 3]| -> S {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < lit(1e-30) {
        return Err(Error::NonConvergent("degenerate fit system".into()));
    }
    let mut sol = [S::zero(); 3];
    for k in 0..3 {
        let mut ak = a;
        for i in 0..3 {
            ak[i][k] = b[i];
        }
        sol[k] = det(&ak) / d;
    }
    let mut ss = S::zero();
    for &(r, y) in samples {
        let f = sol[0] * r * r + sol[1] * r.ln() + sol[2];
        ss = ss + (y - f) * (y - f);
    }
    let rms = (ss / lit(samples.len() as f64)).sqrt();
    Ok(LogQuadFit { alpha: sol[1], beta: sol[0], constant: sol[2], residual_rms: rms })
}

/// Limit extraction assuming `y(x) = y_∞ + c x^{-2}`: least squares on
/// `{1, x^{-2}}`, plus the fitted correction exponent from the residual
/// trend. Used for Richardson-style extrapolation on geometric grids.
#[derive(Clone, Copy, Debug)]
pub struct LimitFit<S> {
    pub limit: S,
    pub correction: S,
    /// Log-log slope of `|y - limit|` against `x` (expected ≈ −2).
    pub correction_exponent: S,
}

pub fn extrapolate_inverse_square<S: Real>(samples: &[(S, S)]) -> Result<LimitFit<S>> {
    if samples.len() < 3 {
        return Err(Error::Precondition("extrapolation needs >= 3 samples".into()));
    }
    let pts: Vec<(S, S)> = samples.iter().map(|&(x, y)| (S::one() / (x * x), y)).collect();
    let (slope, intercept) = linear_fit(&pts);
    let residual_pts: Vec<(S, S)> = samples
        .iter()
        .filter(|&&(_, y)| (y - intercept).abs() > S::zero())
        .map(|&(x, y)| (x.ln(), (y - intercept).abs().ln()))
        .collect();
    let correction_exponent = if residual_pts.len() >= 3 {
        linear_fit(&residual_pts).0
    } else {
        -lit::<S>(2.0)
    };
    Ok(LimitFit { limit: intercept, correction: slope, correction_exponent })
}
