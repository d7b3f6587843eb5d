//! Runge–Kutta baselines on a flat vector field: classical RK4 and an
//! adaptive Dormand–Prince 5(4) pair.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

type Rhs<'a> = dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a;

/// `y' = f(t, y)` on `R^dim` with a right-hand-side evaluation counter.
pub struct FlatODE<'a> {
    dim: usize,
    rhs: Box<Rhs<'a>>,
    evaluations: usize,
}

impl<'a> FlatODE<'a> {
    pub fn new(dim: usize, rhs: impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a) -> Self {
        FlatODE {
            dim,
            rhs: Box::new(rhs),
            evaluations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn eval(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim {
            return Err(Error::dims("FlatODE", (self.dim, 1), (y.len(), 1)));
        }
        let mut out = vec![0.0; self.dim];
        self.evaluations += 1;
        (self.rhs)(t, y, &mut out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        Ok(out)
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

/// One classical RK4 step; exactly four right-hand-side evaluations.
pub fn rk4_step(ode: &mut FlatODE<'_>, t: f64, h: f64, y: &[f64]) -> Result<Vec<f64>> {
    let k1 = ode.eval(t, y)?;
    let k2 = ode.eval(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = ode.eval(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = ode.eval(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    ))
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights; also the last row of the tableau (FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;

/// Outcome of an adaptive solve.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveSolution {
    pub y: Vec<f64>,
    pub evaluations: usize,
    pub accepted: usize,
    pub rejected: usize,
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], atol: f64, rtol: f64) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    libm::sqrt(sum / n)
}

#[allow(clippy::too_many_arguments)]
fn initial_step(
    ode: &mut FlatODE<'_>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    span: f64,
    atol: f64,
    rtol: f64,
) -> Result<f64> {
    let d0 = error_norm(y0, y0, y0, atol, rtol);
    let d1 = error_norm(y0, y0, f0, atol, rtol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = ode.eval(t0 + dir * h0, &y1)?;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = error_norm(y0, y0, &df, atol, rtol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        libm::pow(0.01 / d1.max(d2), 1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Adaptive Dormand–Prince 5(4) from `t0` to `t1` (either direction).
pub fn adaptive_solve(
    ode: &mut FlatODE<'_>,
    t0: f64,
    t1: f64,
    y0: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<AdaptiveSolution> {
    adaptive_solve_observed(ode, t0, t1, y0, abs_tol, rel_tol, |_, _| Ok(()))
}

/// As [`adaptive_solve`], calling `observer(t, y)` after every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_solve_observed(
    ode: &mut FlatODE<'_>,
    t0: f64,
    t1: f64,
    y0: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    mut observer: impl FnMut(f64, &[f64]) -> Result<()>,
) -> Result<AdaptiveSolution> {
    if !(abs_tol > 0.0 && rel_tol > 0.0) {
        return Err(Error::Input("tolerances must be positive".into()));
    }
    if y0.len() != ode.dim() {
        return Err(Error::dims("adaptive_solve", (ode.dim(), 1), (y0.len(), 1)));
    }
    let start_evals = ode.evaluations();
    let mut y = y0.to_vec();
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(AdaptiveSolution {
            y,
            evaluations: 0,
            accepted: 0,
            rejected: 0,
        });
    }
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let h_min = 1e-14 * span;
    let mut t = t0;
    let mut k1 = ode.eval(t, &y)?;
    let mut h = initial_step(ode, t, &y, &k1, dir, span, abs_tol, rel_tol)?;
    let mut err_prev = 1e-4f64;
    let mut last_rejected = false;
    let (mut accepted, mut rejected) = (0, 0);

    while (t1 - t) * dir > 0.0 {
        let remaining = (t1 - t).abs();
        let final_step = h >= remaining;
        if final_step {
            h = remaining;
        }
        if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let hs = dir * h;
        let k2 = ode.eval(t + C[1] * hs, &axpy(&y, hs, &[(A2[0], &k1)]))?;
        let k3 = ode.eval(t + C[2] * hs, &axpy(&y, hs, &[(A3[0], &k1), (A3[1], &k2)]))?;
        let k4 = ode.eval(
            t + C[3] * hs,
            &axpy(&y, hs, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]),
        )?;
        let k5 = ode.eval(
            t + C[4] * hs,
            &axpy(
                &y,
                hs,
                &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)],
            ),
        )?;
        let k6 = ode.eval(
            t + C[5] * hs,
            &axpy(
                &y,
                hs,
                &[
                    (A6[0], &k1),
                    (A6[1], &k2),
                    (A6[2], &k3),
                    (A6[3], &k4),
                    (A6[4], &k5),
                ],
            ),
        )?;
        let y_new = axpy(
            &y,
            hs,
            &[
                (B5[0], &k1),
                (B5[2], &k3),
                (B5[3], &k4),
                (B5[4], &k5),
                (B5[5], &k6),
            ],
        );
        let t_new = if final_step { t1 } else { t + C[6] * hs };
        let k7 = ode.eval(t_new, &y_new)?;
        let ks: [&[f64]; 7] = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let err: Vec<f64> = (0..y.len())
            .map(|j| hs * (0..7).map(|s| (B5[s] - B4[s]) * ks[s][j]).sum::<f64>())
            .collect();
        let e = error_norm(&y, &y_new, &err, abs_tol, rel_tol);
        if e <= 1.0 {
            let fac = if e == 0.0 {
                FAC_MAX
            } else {
                SAFETY * libm::pow(e, -PI_ALPHA) * libm::pow(err_prev, PI_BETA)
            };
            let fac = fac.clamp(FAC_MIN, if last_rejected { 1.0 } else { FAC_MAX });
            err_prev = e.max(1e-4);
            t = t_new;
            y = y_new;
            k1 = k7;
            accepted += 1;
            last_rejected = false;
            observer(t, &y)?;
            h *= fac;
        } else {
            let fac = (SAFETY * libm::pow(e, -PI_ALPHA)).clamp(FAC_MIN, 1.0);
            h *= fac;
            rejected += 1;
            last_rejected = true;
        }
    }
    Ok(AdaptiveSolution {
        y,
        evaluations: ode.evaluations() - start_evals,
        accepted,
        rejected,
    })
}
