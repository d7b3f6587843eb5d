//! Fourth-order commutator-free Magnus integrator for `y' = M(t) y`.

use crate::error::{Error, Result};
use crate::matfun::{expm, Matrix};
use crate::problem::TimeMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Linear non-autonomous system `y' = M(t) y`.
#[derive(Clone, Debug)]
pub struct LinearFlowProblem {
    pub m: TimeMatrix,
    pub direction: Direction,
}

impl LinearFlowProblem {
    pub fn new(m: TimeMatrix, direction: Direction) -> Result<Self> {
        let (r, c) = m.dims();
        if r != c {
            return Err(Error::dims("LinearFlowProblem", (r, r), (r, c)));
        }
        Ok(LinearFlowProblem { m, direction })
    }

    pub fn dim(&self) -> usize {
        self.m.dims().0
    }
}

/// One CF4 step of signed size `h` for a coefficient given as a closure.
///
/// `y_{n+1} = exp(h/12 (-M0 + 4 M½ + 3 M1)) exp(h/12 (3 M0 + 4 M½ - M1)) y_n`
/// with `M_c = M(t_n + c h)`. `y` may be a vector (one column) or a matrix.
pub fn cf4_step_with<F>(m: F, t: f64, h: f64, y: &Matrix) -> Result<Matrix>
where
    F: Fn(f64) -> Result<Matrix>,
{
    let m0 = m(t)?;
    let mh = m(t + 0.5 * h)?;
    let m1 = m(t + h)?;
    let (first, second) = cf4_exponentials(&m0, &mh, &m1, h)?;
    if m0.cols() != y.rows() {
        return Err(Error::dims("cf4_step", (m0.cols(), y.cols()), y.shape()));
    }
    Ok(&second * &(&first * y))
}

/// The two CF4 factors `(E1, E2)` with `y_{n+1} = E2 E1 y_n`, from nodal
/// samples at `t_n`, `t_n + h/2`, `t_n + h`.
pub fn cf4_exponentials(m0: &Matrix, mh: &Matrix, m1: &Matrix, h: f64) -> Result<(Matrix, Matrix)> {
    let w = h / 12.0;
    let first = m0.scale(3.0 * w).axpy(4.0 * w, mh).axpy(-w, m1);
    let second = m0.scale(-w).axpy(4.0 * w, mh).axpy(3.0 * w, m1);
    Ok((expm(&first)?, expm(&second)?))
}

pub fn cf4_step(prob: &LinearFlowProblem, t: f64, h: f64, y: &Matrix) -> Result<Matrix> {
    if h == 0.0 {
        return Err(Error::Input("cf4_step requires h != 0".into()));
    }
    cf4_step_with(|s| prob.m.at(s), t, h, y)
}

/// Work performed by [`integrate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MagnusWork {
    pub matrix_samples: usize,
    pub exponentials: usize,
}

/// Uniform-step CF4 from `t0` to `t1` (either direction).
pub fn integrate_with<F>(
    m: F,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &Matrix,
) -> Result<(Matrix, MagnusWork)>
where
    F: Fn(f64) -> Result<Matrix>,
{
    if steps == 0 {
        return Err(Error::Input("integrate requires steps >= 1".into()));
    }
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        y = cf4_step_with(&m, t, h, &y).map_err(|e| e.at_time(t))?;
    }
    Ok((
        y,
        MagnusWork {
            matrix_samples: 3 * steps,
            exponentials: 2 * steps,
        },
    ))
}

pub fn integrate(
    prob: &LinearFlowProblem,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &Matrix,
) -> Result<(Matrix, MagnusWork)> {
    let expected = match prob.direction {
        Direction::Forward => t1 >= t0,
        Direction::Backward => t1 <= t0,
    };
    if !expected {
        return Err(Error::Input(alloc::format!(
            "interval [{t0}, {t1}] disagrees with {:?} direction",
            prob.direction
        )));
    }
    integrate_with(|s| prob.m.at(s), t0, t1, steps, y0)
}
