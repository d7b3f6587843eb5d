//! Linearized Riccati flow `P = V U^{-1}` and the backward pass that produces
//! its initial value.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::magnus;
use crate::matfun::{expm, symmetry_defect, Lu, Matrix};
use crate::problem::{LQProblem, RiccatiSystem};

/// Snapshot of `y = [U; V_1; ...; V_N]` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiFlow {
    y: Matrix,
    n: usize,
    pub t: f64,
}

/// Flow of an `N`-player game; same layout with `N` stacked `V_i` blocks.
pub type GameFlow = RiccatiFlow;

impl RiccatiFlow {
    /// Wrap a stacked `(N+1)n x n` matrix.
    pub fn from_stacked(y: Matrix, t: f64) -> Result<Self> {
        let n = y.cols();
        if y.rows() < 2 * n || !y.rows().is_multiple_of(n) {
            return Err(Error::dims("RiccatiFlow", (2 * n, n), y.shape()));
        }
        Ok(RiccatiFlow { y, n, t })
    }

    pub fn new(u: Matrix, v: Matrix, t: f64) -> Result<Self> {
        if u.shape() != v.shape() || !u.is_square() {
            return Err(Error::dims("RiccatiFlow", u.shape(), v.shape()));
        }
        RiccatiFlow::from_stacked(Matrix::vstack(&[u, v])?, t)
    }

    pub fn stacked(&self) -> &Matrix {
        &self.y
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn players(&self) -> usize {
        self.y.rows() / self.n - 1
    }

    pub fn u(&self) -> Matrix {
        self.y.block(0, 0, self.n, self.n)
    }

    /// `V_i` for player `i` (zero-based).
    pub fn v(&self, i: usize) -> Matrix {
        self.y.block((i + 1) * self.n, 0, self.n, self.n)
    }

    pub(crate) fn with_stacked(&self, y: Matrix, t: f64) -> RiccatiFlow {
        RiccatiFlow { y, n: self.n, t }
    }

    fn u_factor(&self) -> Result<Lu> {
        let lu = self.u().lu()?;
        lu.require_regular("U").map_err(|e| e.at_time(self.t))?;
        Ok(lu)
    }

    /// Raw `P_i = V_i U^{-1}` for every player, without symmetrization.
    pub fn raw_gains(&self) -> Result<Vec<Matrix>> {
        self.u_factor()?;
        // P U = V  <=>  Uᵀ Pᵀ = Vᵀ
        let lut = self.u().transpose().lu()?;
        (0..self.players())
            .map(|i| Ok(lut.solve(&self.v(i).transpose())?.transpose()))
            .collect()
    }

    /// Reciprocal condition number of `U`.
    pub fn u_rcond(&self) -> Result<f64> {
        Ok(self.u().lu()?.rcond())
    }
}

/// Symmetrized gain together with the symmetry defect of the raw product.
#[derive(Clone, Debug, PartialEq)]
pub struct Gain {
    pub p: Matrix,
    pub raw_symmetry_defect: f64,
}

/// `P = V U^{-1}` of the first (or only) player, symmetrized.
pub fn gain(flow: &RiccatiFlow) -> Result<Gain> {
    let raw = flow.raw_gains()?.swap_remove(0);
    Ok(Gain {
        raw_symmetry_defect: symmetry_defect(&raw)?,
        p: raw.symmetrized(),
    })
}

/// Optimal feedback `u = -R(t)^{-1} B(t)ᵀ V U^{-1} x`.
pub fn control(prob: &LQProblem, t: f64, flow: &RiccatiFlow, x: &[f64]) -> Result<Vec<f64>> {
    let p = gain(flow)?.p;
    Ok(RiccatiSystem::controls(prob, t, &[p], x)?.swap_remove(0))
}

/// `[U0; V0] = exp((t0 - T) K) [I; Q_T]` for time-invariant problems.
pub fn backward_autonomous(prob: &LQProblem) -> Result<RiccatiFlow> {
    if !prob.is_autonomous() {
        return Err(Error::Misuse(
            "backward_autonomous needs constant coefficients; use backward_nonautonomous",
        ));
    }
    backward_exponential(prob)
}

/// Backward pass for time-dependent problems: uniform CF4 steps from `T` to `t0`.
pub fn backward_nonautonomous(prob: &LQProblem, steps: usize) -> Result<RiccatiFlow> {
    backward_magnus(prob, steps)
}

pub(crate) fn backward_exponential<S: RiccatiSystem + ?Sized>(sys: &S) -> Result<RiccatiFlow> {
    let (t0, tf) = (sys.t0(), sys.t_final());
    let k = sys.flow_matrix(tf)?;
    let y = &expm(&k.scale(t0 - tf))? * &sys.terminal_flow();
    let flow = RiccatiFlow::from_stacked(y, t0)?;
    flow.u_factor()?;
    Ok(flow)
}

pub(crate) fn backward_magnus<S: RiccatiSystem + ?Sized>(
    sys: &S,
    steps: usize,
) -> Result<RiccatiFlow> {
    let (t0, tf) = (sys.t0(), sys.t_final());
    if steps == 0 {
        return Err(Error::Input("backward pass needs steps >= 1".into()));
    }
    let h = (t0 - tf) / steps as f64;
    let mut y = sys.terminal_flow();
    let mut flow = RiccatiFlow::from_stacked(y.clone(), tf)?;
    for k in 0..steps {
        let t = tf + k as f64 * h;
        y = magnus::cf4_step_with(|s| sys.flow_matrix(s), t, h, &y).map_err(|e| e.at_time(t))?;
        let t_next = if k + 1 == steps { t0 } else { t + h };
        flow = flow.with_stacked(y.clone(), t_next);
        flow.u_factor()?;
    }
    Ok(flow)
}

/// Default accuracy target on `P(t0)` for the CF4 backward pass. The forward
/// terminal defect amplifies errors in `P(t0)`, so the target sits well below
/// the accuracy expected of the forward pass.
pub const DEFAULT_BACKWARD_TOL: f64 = 1e-14;

/// How the backward pass obtains `y(t0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BackwardMethod {
    /// Single matrix exponential; constant coefficients only.
    Exponential,
    /// CF4 with a fixed number of uniform steps.
    Magnus { steps: usize },
    /// CF4 with step doubling until successive gains `P_i(t0)` agree to
    /// `tol` (relative to `max(1, |P|)`) or stop improving.
    MagnusAuto { tol: f64 },
}

impl BackwardMethod {
    /// Exponential for autonomous systems, otherwise CF4 to
    /// [`DEFAULT_BACKWARD_TOL`].
    pub fn default_for<S: RiccatiSystem + ?Sized>(sys: &S) -> Self {
        if sys.is_autonomous() {
            BackwardMethod::Exponential
        } else {
            BackwardMethod::MagnusAuto {
                tol: DEFAULT_BACKWARD_TOL,
            }
        }
    }
}

/// Result of a backward pass with the number of CF4 steps used (zero for the
/// exponential route).
#[derive(Clone, Debug)]
pub struct BackwardPass {
    pub flow: RiccatiFlow,
    pub magnus_steps: usize,
}

pub fn backward<S: RiccatiSystem + ?Sized>(
    sys: &S,
    method: BackwardMethod,
) -> Result<BackwardPass> {
    match method {
        BackwardMethod::Exponential => {
            if !sys.is_autonomous() {
                return Err(Error::Misuse(
                    "exponential backward pass needs constant coefficients",
                ));
            }
            Ok(BackwardPass {
                flow: backward_exponential(sys)?,
                magnus_steps: 0,
            })
        }
        BackwardMethod::Magnus { steps } => Ok(BackwardPass {
            flow: backward_magnus(sys, steps)?,
            magnus_steps: steps,
        }),
        BackwardMethod::MagnusAuto { tol } => {
            let mut steps = 16;
            let mut prev = backward_magnus(sys, steps)?;
            let mut prev_gains = prev.raw_gains()?;
            let mut prev_diff = f64::INFINITY;
            loop {
                let next = backward_magnus(sys, 2 * steps)?;
                let gains = next.raw_gains()?;
                let diff = gains
                    .iter()
                    .zip(&prev_gains)
                    .map(|(a, b)| (a - b).max_abs())
                    .fold(0.0, f64::max);
                let scale = gains.iter().map(Matrix::max_abs).fold(1.0, f64::max);
                // Past the roundoff floor, more steps only add rounding error.
                if diff >= prev_diff {
                    return Ok(BackwardPass {
                        flow: prev,
                        magnus_steps: steps,
                    });
                }
                steps *= 2;
                // CF4 error at `steps` is about diff/15.
                if diff / 15.0 <= tol * scale || steps >= 1 << 20 {
                    return Ok(BackwardPass {
                        flow: next,
                        magnus_steps: steps,
                    });
                }
                prev = next;
                prev_gains = gains;
                prev_diff = diff;
            }
        }
    }
}
