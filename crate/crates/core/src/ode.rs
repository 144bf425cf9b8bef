//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! One-step explicit Runge–Kutta with the classic embedded error estimate
//! and the order-4 continuous extension. Integration in either direction;
//! the dense solution stores per-step interpolation coefficients and
//! evaluates anywhere inside the covered span.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<S> {
    pub rel_tol: S,
    pub abs_tol: S,
    pub h_init: Option<S>,
    pub h_max: Option<S>,
    pub max_steps: usize,
}

impl<S: Real> Default for OdeOptions<S> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-10),
            abs_tol: lit(1e-12),
            h_init: None,
            h_max: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug)]
struct DenseStep<S, const N: usize> {
    t: S,
    h: S,
    cont: [[S; N]; 5],
}

/// Dense ODE solution over a radial span.
#[derive(Clone, Debug)]
pub struct DenseSolution<S, const N: usize> {
    steps: Vec<DenseStep<S, N>>,
    t_start: S,
    t_end: S,
    pub stats: OdeStats,
    pub rel_tol: S,
    pub abs_tol: S,
}

impl<S: Real, const N: usize> DenseSolution<S, N> {
    /// Covered span as an ordered interval.
    pub fn span(&self) -> (S, S) {
        if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        }
    }

    pub fn contains(&self, t: S) -> bool {
        let (lo, hi) = self.span();
        t >= lo && t <= hi
    }

    /// Interpolated state at `t` (must lie inside the span).
    pub fn eval(&self, t: S) -> Result<[S; N]> {
        if !self.contains(t) {
            let (lo, hi) = self.span();
            return Err(Error::Domain(format!(
                "dense evaluation at {t} outside [{lo}, {hi}]"
            )));
        }
        let forward = self.t_end >= self.t_start;
        // binary search for the step containing t
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let step = &self.steps[mid];
            let t1 = step.t + step.h;
            let past = if forward { t > t1 } else { t < t1 };
            if past {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let step = &self.steps[lo];
        let theta = (t - step.t) / step.h;
        let one = S::one();
        let mut y = [S::zero(); N];
        for i in 0..N {
            let c = &step.cont;
            y[i] = c[0][i]
                + theta
                    * (c[1][i] + (one - theta) * (c[2][i] + theta * (c[3][i] + (one - theta) * c[4][i])));
        }
        Ok(y)
    }

    pub fn start(&self) -> S {
        self.t_start
    }

    pub fn end(&self) -> S {
        self.t_end
    }
}

fn error_norm<S: Real, const N: usize>(e: &[S; N], y0: &[S; N], y1: &[S; N], rtol: S, atol: S) -> S {
    let mut acc = S::zero();
    for i in 0..N {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / sc;
        acc = acc + r * r;
    }
    (acc / lit(N as f64)).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<S: Real, const N: usize, F>(
    f: F,
    t0: S,
    t1: S,
    y0: [S; N],
    opts: &OdeOptions<S>,
) -> Result<DenseSolution<S, N>>
where
    F: Fn(S, &[S; N]) -> [S; N],
{
    let span = t1 - t0;
    if span == S::zero() {
        return Err(Error::Domain("empty integration span".into()));
    }
    let posneg = if span > S::zero() { S::one() } else { -S::one() };
    let h_max = opts.h_max.unwrap_or_else(|| span.abs());
    let mut h = opts
        .h_init
        .unwrap_or_else(|| (span.abs() * lit(1e-3)).min(h_max).max(lit(1e-8)))
        .min(h_max)
        * posneg;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut stats = OdeStats { rhs_evals: 1, ..Default::default() };
    let mut steps: Vec<DenseStep<S, N>> = Vec::new();

    let safe = lit::<S>(0.9);
    let fac_min = lit::<S>(0.2);
    let fac_max = lit::<S>(10.0);
    let expo = S::one() / lit(5.0);
    let mut last = false;

    while !last {
        if stats.steps_accepted + stats.steps_rejected > opts.max_steps {
            return Err(Error::StepSizeCollapse { at: t.to_f64().unwrap_or(f64::NAN) });
        }
        if h.abs() < t.abs() * S::epsilon() * lit(16.0) {
            return Err(Error::StepSizeCollapse { at: t.to_f64().unwrap_or(f64::NAN) });
        }
        if (t + h - t1) * posneg > S::zero() {
            h = t1 - t;
            last = true;
        }

        // stages
        let mut k = [[S::zero(); N]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = [S::zero(); N];
            for i in 0..N {
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc = acc + lit::<S>(A[s][j]) * kj[i];
                }
                ys[i] = y[i] + h * acc;
            }
            k[s + 1] = f(t + lit::<S>(C[s]) * h, &ys);
            stats.rhs_evals += 1;
        }
        // 5th-order solution is the last stage combination (FSAL)
        let mut y1v = [S::zero(); N];
        for i in 0..N {
            let mut acc = S::zero();
            for (j, kj) in k.iter().enumerate().take(6) {
                acc = acc + lit::<S>(A[5][j]) * kj[i];
            }
            y1v[i] = y[i] + h * acc;
        }
        // k[6] = f(t+h, y1)
        let k7 = f(t + h, &y1v);
        stats.rhs_evals += 1;
        k[6] = k7;

        let mut e = [S::zero(); N];
        for i in 0..N {
            let mut acc = S::zero();
            for (j, kj) in k.iter().enumerate() {
                acc = acc + lit::<S>(E[j]) * kj[i];
            }
            e[i] = h * acc;
        }
        let err = error_norm(&e, &y, &y1v, opts.rel_tol, opts.abs_tol);

        if err <= S::one() {
            // dense coefficients for this step
            let mut cont = [[S::zero(); N]; 5];
            for i in 0..N {
                let ydiff = y1v[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate() {
                    acc = acc + lit::<S>(D[j]) * kj[i];
                }
                cont[4][i] = h * acc;
            }
            steps.push(DenseStep { t, h, cont });
            t = t + h;
            y = y1v;
            k1 = k7;
            stats.steps_accepted += 1;
            let fac = safe * (S::one() / err.max(lit(1e-30))).powf(expo);
            h = h * fac.max(fac_min).min(fac_max);
            if h.abs() > h_max {
                h = h_max * posneg;
            }
        } else {
            last = false;
            stats.steps_rejected += 1;
            let fac = safe * (S::one() / err).powf(expo);
            h = h * fac.max(fac_min).min(S::one());
        }
    }

    Ok(DenseSolution {
        steps,
        t_start: t0,
        t_end: t1,
        stats,
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_dense_output() {
        let sol = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, 3.0, [1.0], &OdeOptions::default()).unwrap();
        let mut t = 0.05;
        while t < 3.0 {
            let got = sol.eval(t).unwrap()[0];
            assert!((got / t.exp() - 1.0).abs() < 1e-9, "t={t}");
            t += 0.173;
        }
    }

    #[test]
    fn backward_integration() {
        // y' = -y from t=2 back to t=0 starting at e^{-2}
        let sol = integrate(
            |_t, y: &[f64; 1]| [-y[0]],
            2.0,
            0.0,
            [(-2.0f64).exp()],
            &OdeOptions::default(),
        )
        .unwrap();
        let got = sol.eval(0.3).unwrap()[0];
        assert!((got / (-0.3f64).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillator_second_order_as_system() {
        let sol = integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            10.0,
            [1.0, 0.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for &t in &[1.3, 4.9, 7.7, 9.99] {
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8);
            assert!((y[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn out_of_span_eval_rejected() {
        let sol = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, 1.0, [1.0], &OdeOptions::default()).unwrap();
        assert!(sol.eval(1.5).is_err());
        assert!(sol.eval(-0.1).is_err());
    }
}
