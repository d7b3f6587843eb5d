//! LQ optimal control problem data and the matrices assembled from it.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::matfun::{min_eigenvalue_sym, symmetry_defect, Matrix};

type Evaluator = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;

/// Number of interior sample points used to validate callback coefficients.
const VALIDATION_SAMPLES: usize = 9;

/// A real matrix coefficient as a function of time.
///
/// Evaluator callbacks must be pure: the same `t` must always produce the same
/// matrix.
#[derive(Clone)]
pub struct TimeMatrix {
    source: Source,
    rows: usize,
    cols: usize,
}

#[derive(Clone)]
enum Source {
    Constant(Matrix),
    Varying(Evaluator),
}

impl fmt::Debug for TimeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Constant(m) => f.debug_tuple("TimeMatrix::Constant").field(m).finish(),
            Source::Varying(_) => write!(f, "TimeMatrix::Varying({}x{})", self.rows, self.cols),
        }
    }
}

impl TimeMatrix {
    pub fn constant(m: Matrix) -> Self {
        TimeMatrix {
            rows: m.rows(),
            cols: m.cols(),
            source: Source::Constant(m),
        }
    }

    pub fn varying(
        rows: usize,
        cols: usize,
        f: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        TimeMatrix {
            source: Source::Varying(Arc::new(f)),
            rows,
            cols,
        }
    }

    /// Scalar coefficient `t -> f(t)` as a 1x1 matrix.
    pub fn scalar_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeMatrix::varying(1, 1, move |t| Matrix::scalar(f(t)))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.source, Source::Constant(_))
    }

    /// Evaluate at `t`, checking the declared shape and finiteness.
    pub fn at(&self, t: f64) -> Result<Matrix> {
        match &self.source {
            Source::Constant(m) => Ok(m.clone()),
            Source::Varying(f) => {
                let m = f(t);
                if m.shape() != (self.rows, self.cols) {
                    return Err(Error::dims(
                        "TimeMatrix evaluator",
                        (self.rows, self.cols),
                        m.shape(),
                    ));
                }
                if !m.is_finite() {
                    return Err(Error::NonFinite("TimeMatrix evaluator"));
                }
                Ok(m)
            }
        }
    }

    pub(crate) fn constant_value(&self) -> Option<&Matrix> {
        match &self.source {
            Source::Constant(m) => Some(m),
            Source::Varying(_) => None,
        }
    }
}

/// Sample times `t0 ..= t1` used for structural validation of coefficients.
pub(crate) fn validation_times(t0: f64, t1: f64) -> impl Iterator<Item = f64> {
    (0..=VALIDATION_SAMPLES + 1)
        .map(move |k| t0 + (t1 - t0) * k as f64 / (VALIDATION_SAMPLES + 1) as f64)
}

pub(crate) fn check_psd(name: &str, m: &Matrix, t: f64) -> Result<()> {
    let scale = m.max_abs().max(1.0);
    let defect = symmetry_defect(m)?;
    if defect > 1e-12 * scale {
        return Err(Error::Input(alloc::format!(
            "{name} not symmetric at t = {t} (defect {defect:e})"
        )));
    }
    let lmin = min_eigenvalue_sym(m)?;
    if lmin < -1e-12 * scale {
        return Err(Error::Input(alloc::format!(
            "{name} not positive semidefinite at t = {t} (eigenvalue {lmin:e})"
        )));
    }
    Ok(())
}

pub(crate) fn check_pd(name: &str, m: &Matrix, t: f64) -> Result<()> {
    check_psd(name, m, t)?;
    let lmin = min_eigenvalue_sym(m)?;
    if lmin <= 0.0 {
        return Err(Error::Input(alloc::format!(
            "{name} not positive definite at t = {t}"
        )));
    }
    Ok(())
}

fn expect_dims(name: &'static str, tm: &TimeMatrix, expected: (usize, usize)) -> Result<()> {
    if tm.dims() != expected {
        return Err(Error::dims(name, expected, tm.dims()));
    }
    Ok(())
}

/// `B R^{-1}` applied as `R^{-1} Bᵀ`, i.e. the feedback operator of one
/// control channel, plus the coupling matrix `S = B R^{-1} Bᵀ`.
#[derive(Clone, Debug)]
pub(crate) struct Channel {
    pub(crate) b: TimeMatrix,
    pub(crate) r: TimeMatrix,
    cached: Option<(Matrix, Matrix)>,
}

impl Channel {
    pub(crate) fn new(b: TimeMatrix, r: TimeMatrix) -> Result<Self> {
        let cached = match (b.constant_value(), r.constant_value()) {
            (Some(b), Some(r)) => Some(channel_matrices(b, r, f64::NAN)?),
            _ => None,
        };
        Ok(Channel { b, r, cached })
    }

    /// `(S, R^{-1} Bᵀ)` at `t`.
    pub(crate) fn at(&self, t: f64) -> Result<(Matrix, Matrix)> {
        if let Some(c) = &self.cached {
            return Ok(c.clone());
        }
        channel_matrices(&self.b.at(t)?, &self.r.at(t)?, t)
    }
}

fn channel_matrices(b: &Matrix, r: &Matrix, t: f64) -> Result<(Matrix, Matrix)> {
    let lu = r.lu()?;
    lu.require_regular("R").map_err(|e| e.at_time(t))?;
    let gain = lu.solve(&b.transpose())?;
    let s = (b * &gain).symmetrized();
    Ok((s, gain))
}

/// Data of `x' = A x + B u`, cost `x(T)ᵀ Q_T x(T) + ∫ xᵀQx + uᵀRu` on `[t0, T]`.
#[derive(Clone, Debug)]
pub struct LQProblem {
    a: TimeMatrix,
    channel: Channel,
    q: TimeMatrix,
    q_terminal: Matrix,
    x0: Vec<f64>,
    t0: f64,
    t_final: f64,
}

impl LQProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: TimeMatrix,
        b: TimeMatrix,
        q: TimeMatrix,
        r: TimeMatrix,
        q_terminal: Matrix,
        x0: Vec<f64>,
        t0: f64,
        t_final: f64,
    ) -> Result<Self> {
        let n = a.dims().0;
        let r_dim = b.dims().1;
        expect_dims("A", &a, (n, n))?;
        expect_dims("B", &b, (n, r_dim))?;
        expect_dims("Q", &q, (n, n))?;
        expect_dims("R", &r, (r_dim, r_dim))?;
        if q_terminal.shape() != (n, n) {
            return Err(Error::dims("Q_T", (n, n), q_terminal.shape()));
        }
        if x0.len() != n {
            return Err(Error::dims("x0", (n, 1), (x0.len(), 1)));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("x0"));
        }
        if !(t0 < t_final) {
            return Err(Error::Input(alloc::format!(
                "horizon requires t0 < T (got {t0}, {t_final})"
            )));
        }
        check_psd("Q_T", &q_terminal, t_final)?;
        for t in validation_times(t0, t_final) {
            check_psd("Q", &q.at(t)?, t)?;
            check_pd("R", &r.at(t)?, t)?;
            a.at(t)?;
            b.at(t)?;
        }
        Ok(LQProblem {
            channel: Channel::new(b, r)?,
            a,
            q,
            q_terminal,
            x0,
            t0,
            t_final,
        })
    }

    /// Time-invariant problem from constant matrices.
    pub fn constant(
        a: Matrix,
        b: Matrix,
        q: Matrix,
        r: Matrix,
        q_terminal: Matrix,
        x0: Vec<f64>,
        t0: f64,
        t_final: f64,
    ) -> Result<Self> {
        LQProblem::new(
            TimeMatrix::constant(a),
            TimeMatrix::constant(b),
            TimeMatrix::constant(q),
            TimeMatrix::constant(r),
            q_terminal,
            x0,
            t0,
            t_final,
        )
    }

    pub fn a(&self) -> &TimeMatrix {
        &self.a
    }

    pub fn b(&self) -> &TimeMatrix {
        &self.channel.b
    }

    pub fn q(&self) -> &TimeMatrix {
        &self.q
    }

    pub fn r(&self) -> &TimeMatrix {
        &self.channel.r
    }

    pub fn q_terminal(&self) -> &Matrix {
        &self.q_terminal
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn state_dim(&self) -> usize {
        self.a.dims().0
    }

    pub fn is_autonomous(&self) -> bool {
        self.a.is_constant()
            && self.channel.b.is_constant()
            && self.q.is_constant()
            && self.channel.r.is_constant()
    }
}

/// `S(t) = B(t) R(t)^{-1} B(t)ᵀ`.
pub fn s_matrix(prob: &LQProblem, t: f64) -> Result<Matrix> {
    Ok(prob.channel.at(t)?.0)
}

/// `K(t) = [[A, -S], [-Q, -Aᵀ]]`.
pub fn hamiltonian_matrix(prob: &LQProblem, t: f64) -> Result<Matrix> {
    let a = prob.a.at(t)?;
    let s = s_matrix(prob, t)?;
    let q = prob.q.at(t)?;
    let n = a.rows();
    let mut k = Matrix::zeros(2 * n, 2 * n);
    k.set_block(0, 0, &a);
    k.set_block(0, n, &-&s);
    k.set_block(n, 0, &-&q);
    k.set_block(n, n, &-&a.transpose());
    Ok(k)
}

/// Closed-loop state matrix `A(t) - S(t) P`.
pub fn closed_loop_matrix(prob: &LQProblem, t: f64, p: &Matrix) -> Result<Matrix> {
    let n = prob.state_dim();
    if p.shape() != (n, n) {
        return Err(Error::dims("closed_loop_matrix", (n, n), p.shape()));
    }
    let a = prob.a.at(t)?;
    let s = s_matrix(prob, t)?;
    Ok(&a - &(&s * p))
}

/// A forward/backward Riccati system in linearized form.
///
/// The flow variable is the stacked `(N+1)n x n` matrix `y = [U; V_1; ...; V_N]`
/// obeying `y' = K(t) y`, and the state obeys
/// `x' = (A(t) - Σ S_i(t) V_i U^{-1}) x`. An LQ problem is the case `N = 1`.
pub trait RiccatiSystem {
    fn state_dim(&self) -> usize;
    fn players(&self) -> usize;
    fn t0(&self) -> f64;
    fn t_final(&self) -> f64;
    fn x0(&self) -> &[f64];
    fn is_autonomous(&self) -> bool;

    /// `A(t)`.
    fn drift(&self, t: f64) -> Result<Matrix>;

    /// Per-player `(S_i(t), R_ii^{-1}(t) B_i(t)ᵀ)`.
    fn channels(&self, t: f64) -> Result<Vec<(Matrix, Matrix)>>;

    /// Block matrix `K(t)` of size `(N+1)n`.
    fn flow_matrix(&self, t: f64) -> Result<Matrix>;

    /// Terminal gains `Q_iT`.
    fn terminal_gains(&self) -> Vec<Matrix>;

    /// `y(T) = [I; Q_1T; ...; Q_NT]`.
    fn terminal_flow(&self) -> Matrix {
        let n = self.state_dim();
        let mut parts = vec![Matrix::identity(n)];
        parts.extend(self.terminal_gains());
        Matrix::vstack(&parts).expect("terminal blocks share column count")
    }

    /// `A(t) - Σ S_i(t) P_i`.
    fn closed_loop(&self, t: f64, gains: &[Matrix]) -> Result<Matrix> {
        let mut m = self.drift(t)?;
        for ((s, _), p) in self.channels(t)?.iter().zip(gains) {
            m = &m - &(s * p);
        }
        Ok(m)
    }

    /// Controls `u_i = -R_ii^{-1} B_iᵀ P_i x`.
    fn controls(&self, t: f64, gains: &[Matrix], x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.channels(t)?
            .iter()
            .zip(gains)
            .map(|((_, fb), p)| {
                let px = p.mul_vec(x)?;
                Ok(fb.mul_vec(&px)?.into_iter().map(|v| -v).collect())
            })
            .collect()
    }

    fn describe(&self) -> String {
        alloc::format!("n = {}, N = {}", self.state_dim(), self.players())
    }
}

impl RiccatiSystem for LQProblem {
    fn state_dim(&self) -> usize {
        LQProblem::state_dim(self)
    }
    fn players(&self) -> usize {
        1
    }
    fn t0(&self) -> f64 {
        self.t0
    }
    fn t_final(&self) -> f64 {
        self.t_final
    }
    fn x0(&self) -> &[f64] {
        &self.x0
    }
    fn is_autonomous(&self) -> bool {
        LQProblem::is_autonomous(self)
    }
    fn drift(&self, t: f64) -> Result<Matrix> {
        self.a.at(t)
    }
    fn channels(&self, t: f64) -> Result<Vec<(Matrix, Matrix)>> {
        Ok(vec![self.channel.at(t)?])
    }
    fn flow_matrix(&self, t: f64) -> Result<Matrix> {
        hamiltonian_matrix(self, t)
    }
    fn terminal_gains(&self) -> Vec<Matrix> {
        vec![self.q_terminal.clone()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::hamiltonian_defect;

    fn scalar_problem(a: f64, b: f64, q: f64, r: f64) -> LQProblem {
        LQProblem::constant(
            Matrix::scalar(a),
            Matrix::scalar(b),
            Matrix::scalar(q),
            Matrix::scalar(r),
            Matrix::scalar(0.0),
            vec![10.0],
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn s_matrix_zero_b() {
        let p = scalar_problem(1.0, 0.0, 1.0, 2.0);
        assert_eq!(s_matrix(&p, 0.3).unwrap(), Matrix::scalar(0.0));
    }

    #[test]
    fn pollution_player_one_hamiltonian() {
        // a = b = 1, c1 = 11/2, d1 = 2/11: A = -a, R = c1, Q = d1.
        let p = scalar_problem(-1.0, 1.0, 2.0 / 11.0, 5.5);
        let s = s_matrix(&p, 0.0).unwrap();
        assert!((s[(0, 0)] - 2.0 / 11.0).abs() < 1e-16);
        let k = hamiltonian_matrix(&p, 0.0).unwrap();
        let expect = Matrix::from_rows(&[&[-1.0, -2.0 / 11.0], &[-2.0 / 11.0, 1.0]]);
        assert!((&k - &expect).max_abs() < 1e-16);
    }

    #[test]
    fn zero_data_hamiltonian_is_zero() {
        let p = scalar_problem(0.0, 0.0, 0.0, 1.0);
        assert_eq!(hamiltonian_matrix(&p, 0.5).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn closed_loop_examples() {
        let p = LQProblem::constant(
            Matrix::zeros(2, 2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::zeros(2, 2),
            vec![1.0, 1.0],
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(
            closed_loop_matrix(&p, 0.0, &Matrix::zeros(2, 2)).unwrap(),
            Matrix::zeros(2, 2)
        );
        assert_eq!(
            closed_loop_matrix(&p, 0.0, &Matrix::identity(2)).unwrap(),
            -&Matrix::identity(2)
        );
        assert!(closed_loop_matrix(&p, 0.0, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn validation_rejects_bad_data() {
        let bad_r = LQProblem::constant(
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(0.0),
            Matrix::scalar(0.0),
            vec![1.0],
            0.0,
            1.0,
        );
        assert!(bad_r.is_err());
        let bad_q = LQProblem::constant(
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(-1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(0.0),
            vec![1.0],
            0.0,
            1.0,
        );
        assert!(bad_q.is_err());
        let bad_horizon = LQProblem::constant(
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(1.0),
            Matrix::scalar(0.0),
            vec![1.0],
            1.0,
            1.0,
        );
        assert!(bad_horizon.is_err());
        let wrong_dims = LQProblem::new(
            TimeMatrix::varying(1, 1, |_| Matrix::zeros(2, 2)),
            TimeMatrix::constant(Matrix::scalar(1.0)),
            TimeMatrix::constant(Matrix::scalar(1.0)),
            TimeMatrix::constant(Matrix::scalar(1.0)),
            Matrix::scalar(0.0),
            vec![1.0],
            0.0,
            1.0,
        );
        assert!(matches!(wrong_dims, Err(Error::Dimension { .. })));
    }

    #[test]
    fn hamiltonian_structure_of_k() {
        let p = LQProblem::constant(
            Matrix::from_rows(&[&[0.1, 2.0], &[-0.3, 0.4]]),
            Matrix::from_rows(&[&[1.0], &[0.5]]),
            Matrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]),
            Matrix::scalar(0.7),
            Matrix::zeros(2, 2),
            vec![1.0, 0.0],
            0.0,
            2.0,
        )
        .unwrap();
        let k = hamiltonian_matrix(&p, 0.0).unwrap();
        assert!(hamiltonian_defect(&k).unwrap() <= 1e-12);
    }
}
