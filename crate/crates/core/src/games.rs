//! `N`-player linear-quadratic differential games.
//!
//! Non-zero-sum games share the linearized structure of the LQ problem with
//! the stacked flow `[U; V_1; ...; V_N]`. The two-player zero-sum variant
//! couples the Riccati equations quadratically and is integrated directly in
//! the gains.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matfun::{expm, Matrix};
use crate::pipeline::{self, Method, Trajectory};
use crate::problem::{check_pd, check_psd, validation_times, Channel, RiccatiSystem, TimeMatrix};
use crate::riccati::{self, BackwardMethod, RiccatiFlow};
use crate::splitting::{compose, ExtendedState, SchemeKind, SplittingScheme, StepMap};

/// Degree of the Taylor polynomial used for the quadratic sub-flow of the
/// zero-sum base map.
const QUADRATIC_TAYLOR_DEGREE: usize = 8;

/// Data of one player: input matrix `B_i`, control weight `R_ii`, state
/// weight `Q_i` and terminal weight `Q_iT`.
#[derive(Clone, Debug)]
pub struct Player {
    pub b: TimeMatrix,
    pub r: TimeMatrix,
    pub q: TimeMatrix,
    pub q_terminal: Matrix,
}

impl Player {
    pub fn new(b: TimeMatrix, r: TimeMatrix, q: TimeMatrix, q_terminal: Matrix) -> Self {
        Player {
            b,
            r,
            q,
            q_terminal,
        }
    }

    pub fn constant(b: Matrix, r: Matrix, q: Matrix, q_terminal: Matrix) -> Self {
        Player::new(
            TimeMatrix::constant(b),
            TimeMatrix::constant(r),
            TimeMatrix::constant(q),
            q_terminal,
        )
    }
}

#[derive(Clone, Debug)]
struct CrossWeights {
    r12: TimeMatrix,
    r21: TimeMatrix,
    /// `B_2 R_12^{-1} B_2ᵀ`, entering the first player's equation.
    first: Channel,
    /// `B_1 R_21^{-1} B_1ᵀ`, entering the second player's equation.
    second: Channel,
}

#[derive(Clone, Debug)]
pub struct GameProblem {
    a: TimeMatrix,
    players: Vec<Player>,
    channels: Vec<Channel>,
    cross: Option<CrossWeights>,
    x0: Vec<f64>,
    t0: f64,
    t_final: f64,
}

fn expect_dims(name: &'static str, tm: &TimeMatrix, expected: (usize, usize)) -> Result<()> {
    if tm.dims() != expected {
        return Err(Error::dims(name, expected, tm.dims()));
    }
    Ok(())
}

impl GameProblem {
    /// Non-zero-sum game (`R_ij = 0` for `i != j`).
    pub fn new(
        a: TimeMatrix,
        players: Vec<Player>,
        x0: Vec<f64>,
        t0: f64,
        t_final: f64,
    ) -> Result<Self> {
        let n = a.dims().0;
        expect_dims("A", &a, (n, n))?;
        if players.is_empty() {
            return Err(Error::Input("a game needs at least one player".into()));
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
        let mut channels = Vec::with_capacity(players.len());
        for (i, p) in players.iter().enumerate() {
            validate_player(p, n, t0, t_final).map_err(|e| e.for_player(i + 1))?;
            channels.push(Channel::new(p.b.clone(), p.r.clone()).map_err(|e| e.for_player(i + 1))?);
        }
        for t in validation_times(t0, t_final) {
            a.at(t)?;
        }
        Ok(GameProblem {
            a,
            players,
            channels,
            cross: None,
            x0,
            t0,
            t_final,
        })
    }

    /// Switch a two-player game to zero-sum mode with cross weights `R_12`
    /// (weighting `u_2` in the first cost) and `R_21` (weighting `u_1` in the
    /// second cost).
    pub fn with_zero_sum(mut self, r12: TimeMatrix, r21: TimeMatrix) -> Result<Self> {
        if self.players.len() != 2 {
            return Err(Error::Input(alloc::format!(
                "zero-sum mode needs exactly two players (got {})",
                self.players.len()
            )));
        }
        let m1 = self.players[0].b.dims().1;
        let m2 = self.players[1].b.dims().1;
        expect_dims("R_12", &r12, (m2, m2))?;
        expect_dims("R_21", &r21, (m1, m1))?;
        for t in validation_times(self.t0, self.t_final) {
            check_pd("R_12", &r12.at(t)?, t)?;
            check_pd("R_21", &r21.at(t)?, t)?;
        }
        let first = Channel::new(self.players[1].b.clone(), r12.clone())?;
        let second = Channel::new(self.players[0].b.clone(), r21.clone())?;
        self.cross = Some(CrossWeights {
            r12,
            r21,
            first,
            second,
        });
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.a.dims().0
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn a(&self) -> &TimeMatrix {
        &self.a
    }

    pub fn player(&self, i: usize) -> &Player {
        &self.players[i]
    }

    pub fn is_zero_sum(&self) -> bool {
        self.cross.is_some()
    }

    /// Cross weights `(R_12, R_21)` in zero-sum mode.
    pub fn cross_weights(&self) -> Option<(&TimeMatrix, &TimeMatrix)> {
        self.cross.as_ref().map(|c| (&c.r12, &c.r21))
    }

    pub fn is_autonomous(&self) -> bool {
        let players = self
            .players
            .iter()
            .all(|p| p.b.is_constant() && p.r.is_constant() && p.q.is_constant());
        let cross = self
            .cross
            .as_ref()
            .is_none_or(|c| c.r12.is_constant() && c.r21.is_constant());
        self.a.is_constant() && players && cross
    }

    fn couplings(&self, t: f64) -> Result<Vec<Matrix>> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| Ok(c.at(t).map_err(|e| e.for_player(i + 1))?.0))
            .collect()
    }
}

fn validate_player(p: &Player, n: usize, t0: f64, t_final: f64) -> Result<()> {
    let m = p.b.dims().1;
    expect_dims("B", &p.b, (n, m))?;
    expect_dims("R", &p.r, (m, m))?;
    expect_dims("Q", &p.q, (n, n))?;
    if p.q_terminal.shape() != (n, n) {
        return Err(Error::dims("Q_T", (n, n), p.q_terminal.shape()));
    }
    check_psd("Q_T", &p.q_terminal, t_final)?;
    for t in validation_times(t0, t_final) {
        check_psd("Q", &p.q.at(t)?, t)?;
        check_pd("R", &p.r.at(t)?, t)?;
        p.b.at(t)?;
    }
    Ok(())
}

/// Block matrix `[[A, -S_1 ... -S_N], [-Q_1; ...; -Q_N, blockdiag(-Aᵀ)]]`.
pub fn game_block_matrix(game: &GameProblem, t: f64) -> Result<Matrix> {
    let a = game.a.at(t)?;
    let n = a.rows();
    let np = game.players.len();
    let minus_at = -&a.transpose();
    let mut k = Matrix::zeros((np + 1) * n, (np + 1) * n);
    k.set_block(0, 0, &a);
    for (i, s) in game.couplings(t)?.iter().enumerate() {
        let q = game.players[i].q.at(t).map_err(|e| e.for_player(i + 1))?;
        k.set_block(0, (i + 1) * n, &-s);
        k.set_block((i + 1) * n, 0, &-&q);
        k.set_block((i + 1) * n, (i + 1) * n, &minus_at);
    }
    Ok(k)
}

impl RiccatiSystem for GameProblem {
    fn state_dim(&self) -> usize {
        GameProblem::state_dim(self)
    }
    fn players(&self) -> usize {
        self.players.len()
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
        GameProblem::is_autonomous(self)
    }
    fn drift(&self, t: f64) -> Result<Matrix> {
        self.a.at(t)
    }
    fn channels(&self, t: f64) -> Result<Vec<(Matrix, Matrix)>> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| c.at(t).map_err(|e| e.for_player(i + 1)))
            .collect()
    }
    fn flow_matrix(&self, t: f64) -> Result<Matrix> {
        if self.is_zero_sum() {
            return Err(Error::Misuse(
                "a zero-sum game has no linear flow; use solve_zero_sum",
            ));
        }
        game_block_matrix(self, t)
    }
    fn terminal_gains(&self) -> Vec<Matrix> {
        self.players.iter().map(|p| p.q_terminal.clone()).collect()
    }
}

/// Backward pass on the block system (exponential when autonomous, CF4 with
/// `steps_backward` steps otherwise) followed by a forward splitting pass.
///
/// Near-integrable schemes split off the drift `A`, which must then be
/// constant.
pub fn solve_game(
    game: &GameProblem,
    scheme: &SplittingScheme,
    steps_backward: usize,
    steps_forward: usize,
) -> Result<Trajectory> {
    if game.is_zero_sum() {
        return Err(Error::Misuse(
            "solve_game handles non-zero-sum games; use solve_zero_sum",
        ));
    }
    let method = match scheme.kind {
        SchemeKind::NearIntegrable { .. } => {
            if !game.a.is_constant() {
                return Err(Error::Misuse(
                    "near-integrable schemes need a constant drift to split off",
                ));
            }
            Method::NearIntegrable {
                scheme: scheme.clone(),
                dominant: game.a.at(game.t0)?,
            }
        }
        _ => Method::Splitting(scheme.clone()),
    };
    let backward = if game.is_autonomous() {
        BackwardMethod::Exponential
    } else {
        BackwardMethod::Magnus {
            steps: steps_backward,
        }
    };
    pipeline::solve(game, &method, steps_forward, backward)
}

/// Coefficients of the zero-sum coupled Riccati system frozen at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumCoefficients {
    pub a: Matrix,
    pub q: [Matrix; 2],
    /// `S_i = B_i R_ii^{-1} B_iᵀ`.
    pub s: [Matrix; 2],
    /// Cross terms: `B_2 R_12^{-1} B_2ᵀ` for the first equation and
    /// `B_1 R_21^{-1} B_1ᵀ` for the second.
    pub cross: [Matrix; 2],
}

impl ZeroSumCoefficients {
    pub fn at(game: &GameProblem, t: f64) -> Result<Self> {
        let cw = game
            .cross
            .as_ref()
            .ok_or(Error::Misuse("zero-sum coefficients need zero-sum mode"))?;
        let s = game.couplings(t)?;
        Ok(ZeroSumCoefficients {
            a: game.a.at(t)?,
            q: [game.players[0].q.at(t)?, game.players[1].q.at(t)?],
            s: [s[0].clone(), s[1].clone()],
            cross: [cw.first.at(t)?.0, cw.second.at(t)?.0],
        })
    }

    /// Quadratic part evaluated on `(x, y)`; `quadratic(p, p)` is the
    /// quadratic right-hand side.
    fn quadratic(&self, x: &[Matrix; 2], y: &[Matrix; 2]) -> [Matrix; 2] {
        let [s1, s2] = &self.s;
        let [c1, c2] = &self.cross;
        let f1 = &(&(&(&x[0] * s1) * &y[0]) + &(&(&x[0] * s2) * &y[1])) + &(&(&x[1] * c1) * &y[1]);
        let f2 = &(&(&(&x[1] * s2) * &y[1]) + &(&(&x[1] * s1) * &y[0])) + &(&(&x[0] * c2) * &y[0]);
        [f1, f2]
    }

    fn linear(&self, p: &Matrix, q: &Matrix) -> Matrix {
        let at = self.a.transpose();
        &(&(-q) - &(&at * p)) - &(p * &self.a)
    }

    /// Right-hand sides `(P_1', P_2')`.
    pub fn rhs(&self, p1: &Matrix, p2: &Matrix) -> (Matrix, Matrix) {
        let p = [p1.clone(), p2.clone()];
        let [n1, n2] = self.quadratic(&p, &p);
        (
            &self.linear(p1, &self.q[0]) + &n1,
            &self.linear(p2, &self.q[1]) + &n2,
        )
    }

    /// Exact flow of the affine part `P_i' = -Q_i - AᵀP_i - P_i A` over `tau`.
    fn linear_flow(&self, tau: f64, p: &[Matrix; 2]) -> Result<[Matrix; 2]> {
        let n = self.a.rows();
        let mut l = Matrix::zeros(3 * n, 3 * n);
        let minus_at = -&self.a.transpose();
        l.set_block(0, 0, &self.a);
        l.set_block(n, 0, &-&self.q[0]);
        l.set_block(2 * n, 0, &-&self.q[1]);
        l.set_block(n, n, &minus_at);
        l.set_block(2 * n, 2 * n, &minus_at);
        let e = expm(&l.scale(tau))?;
        let y = &e * &Matrix::vstack(&[Matrix::identity(n), p[0].clone(), p[1].clone()])?;
        let flow = RiccatiFlow::from_stacked(y, 0.0)?;
        let g = flow.raw_gains()?;
        Ok([g[0].clone(), g[1].clone()])
    }

    /// Taylor polynomial of the quadratic flow `P' = N(P)` over `tau`, with
    /// coefficients from `c_{k+1} = (1/(k+1)) Σ_j N(c_j, c_{k-j})`.
    fn quadratic_flow(&self, tau: f64, p: &[Matrix; 2]) -> [Matrix; 2] {
        let mut coeffs: Vec<[Matrix; 2]> = vec![p.clone()];
        for k in 0..QUADRATIC_TAYLOR_DEGREE {
            let n = p[0].rows();
            let mut next = [Matrix::zeros(n, n), Matrix::zeros(n, n)];
            for j in 0..=k {
                let [f1, f2] = self.quadratic(&coeffs[j], &coeffs[k - j]);
                next[0] = next[0].axpy(1.0, &f1);
                next[1] = next[1].axpy(1.0, &f2);
            }
            let w = 1.0 / (k + 1) as f64;
            coeffs.push([next[0].scale(w), next[1].scale(w)]);
        }
        // Horner in tau.
        let mut acc = coeffs[QUADRATIC_TAYLOR_DEGREE].clone();
        for c in coeffs.iter().rev().skip(1) {
            acc = [c[0].axpy(tau, &acc[0]), c[1].axpy(tau, &acc[1])];
        }
        acc
    }
}

/// Right-hand sides of the zero-sum coupled Riccati equations at `t`.
pub fn zero_sum_rhs(
    game: &GameProblem,
    t: f64,
    p1: &Matrix,
    p2: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let n = game.state_dim();
    for p in [p1, p2] {
        if p.shape() != (n, n) {
            return Err(Error::dims("zero_sum_rhs", (n, n), p.shape()));
        }
    }
    Ok(ZeroSumCoefficients::at(game, t)?.rhs(p1, p2))
}

/// Symmetric second-order map for the zero-sum gains: half step of the
/// affine part, full step of the quadratic part, half step of the affine
/// part, with coefficients frozen at the step midpoint.
pub fn zero_sum_base_map(
    game: &GameProblem,
    t: f64,
    h: f64,
    p: &[Matrix; 2],
) -> Result<[Matrix; 2]> {
    if h == 0.0 {
        return Ok(p.clone());
    }
    let c = ZeroSumCoefficients::at(game, t + 0.5 * h)?;
    let half = c.linear_flow(0.5 * h, p)?;
    let quad = c.quadratic_flow(h, &half);
    let out = c.linear_flow(0.5 * h, &quad)?;
    if out.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFinite("zero-sum base map"));
    }
    Ok(out)
}

fn zero_sum_backward_run(game: &GameProblem, steps: usize) -> Result<[Matrix; 2]> {
    let h = (game.t0 - game.t_final) / steps as f64;
    let mut p = [
        game.players[0].q_terminal.clone(),
        game.players[1].q_terminal.clone(),
    ];
    for k in 0..steps {
        let t = game.t_final + k as f64 * h;
        p = zero_sum_base_map(game, t, h, &p)?;
    }
    Ok(p)
}

/// Extrapolated initial gains together with the successive differences of
/// the three underlying runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumBackward {
    pub p: [Matrix; 2],
    /// `max |P_h - P_{h/2}|` and `max |P_{h/2} - P_{h/4}|`.
    pub differences: [f64; 2],
}

/// Backward pass from `T` to `t0` with `steps`, `2 steps` and `4 steps`
/// base-map steps, Richardson-extrapolated to order six.
pub fn zero_sum_backward(game: &GameProblem, steps: usize) -> Result<ZeroSumBackward> {
    if !game.is_zero_sum() {
        return Err(Error::Misuse("zero-sum backward pass needs zero-sum mode"));
    }
    if steps == 0 {
        return Err(Error::Input("backward pass needs steps >= 1".into()));
    }
    let runs = [
        zero_sum_backward_run(game, steps)?,
        zero_sum_backward_run(game, 2 * steps)?,
        zero_sum_backward_run(game, 4 * steps)?,
    ];
    let diff =
        |a: &[Matrix; 2], b: &[Matrix; 2]| (&a[0] - &b[0]).max_abs().max((&a[1] - &b[1]).max_abs());
    let d1 = diff(&runs[0], &runs[1]);
    let d2 = diff(&runs[1], &runs[2]);
    let scale = runs[2].iter().map(Matrix::max_abs).fold(1.0, f64::max);
    let at_roundoff = d1.max(d2) <= 1e-13 * scale;
    if !at_roundoff && !(d2 < d1) {
        return Err(Error::Extrapolation(alloc::format!(
            "differences do not decrease under step halving ({d1:e} then {d2:e}); increase the backward steps"
        )));
    }
    let p = core::array::from_fn(|i| {
        let r1 = runs[1][i].scale(4.0 / 3.0).axpy(-1.0 / 3.0, &runs[0][i]);
        let r2 = runs[2][i].scale(4.0 / 3.0).axpy(-1.0 / 3.0, &runs[1][i]);
        r2.scale(16.0 / 15.0).axpy(-1.0 / 15.0, &r1)
    });
    Ok(ZeroSumBackward {
        p,
        differences: [d1, d2],
    })
}

/// The symmetric forward map on gains and state: half state step with the
/// current gains, base map on the gains, half state step with the new gains.
/// Gains are carried as `V_i` with `U = I`.
pub struct ZeroSumStep<'a> {
    game: &'a GameProblem,
    evaluations: usize,
}

impl<'a> ZeroSumStep<'a> {
    pub fn new(game: &'a GameProblem) -> Self {
        ZeroSumStep {
            game,
            evaluations: 0,
        }
    }
}

impl StepMap for ZeroSumStep<'_> {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState> {
        if h == 0.0 {
            return Ok(state.clone());
        }
        let t = state.t1;
        let g = state.flow.raw_gains()?;
        let n0 = self.game.closed_loop(t, &g)?;
        let x = expm(&n0.scale(0.5 * h))?.mul_vec(&state.x)?;
        let p = zero_sum_base_map(self.game, t, h, &[g[0].clone(), g[1].clone()])?;
        let n1 = self.game.closed_loop(t + h, &p)?;
        let x = expm(&n1.scale(0.5 * h))?.mul_vec(&x)?;
        let flow = gain_flow(self.game.state_dim(), &p, t + h)?;
        self.evaluations += 1;
        Ok(ExtendedState {
            flow,
            x,
            t1: t + h,
            t2: t + h,
        })
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn name(&self) -> String {
        "zero-sum".into()
    }
}

fn gain_flow(n: usize, p: &[Matrix; 2], t: f64) -> Result<RiccatiFlow> {
    RiccatiFlow::from_stacked(
        Matrix::vstack(&[Matrix::identity(n), p[0].clone(), p[1].clone()])?,
        t,
    )
}

/// Zero-sum solve: extrapolated backward pass, then the base map composed
/// with `composition_alphas` forward over `steps_forward` steps.
pub fn solve_zero_sum(
    game: &GameProblem,
    steps_backward: usize,
    composition_alphas: &[f64],
    steps_forward: usize,
) -> Result<Trajectory> {
    let back = zero_sum_backward(game, steps_backward)?;
    let flow0 = gain_flow(game.state_dim(), &back.p, game.t0)?;
    let start = ExtendedState::new(flow0, game.x0.clone());
    let mut stepper = compose(ZeroSumStep::new(game), composition_alphas.to_vec())?;
    if steps_forward == 0 {
        return Err(Error::Input("forward pass needs steps >= 1".into()));
    }
    let mut traj = pipeline::run_step_map(game, &mut stepper, start, steps_forward, "zero-sum")?;
    traj.backward_steps = 7 * steps_backward;
    Ok(traj)
}

/// Non-zero-sum solve through the generic pipeline with a default backward
/// pass.
pub fn solve_game_with(
    game: &GameProblem,
    method: &Method,
    steps_forward: usize,
) -> Result<Trajectory> {
    pipeline::solve(
        game,
        method,
        steps_forward,
        BackwardMethod::default_for(game),
    )
}

/// Initial flow of a non-zero-sum game via the default backward pass.
pub fn game_initial_flow(game: &GameProblem) -> Result<RiccatiFlow> {
    Ok(riccati::backward(game, BackwardMethod::default_for(game))?.flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{hamiltonian_matrix, LQProblem};

    fn scalar_player(b: f64, r: f64, q: f64, qt: f64) -> Player {
        Player::constant(
            Matrix::scalar(b),
            Matrix::scalar(r),
            Matrix::scalar(q),
            Matrix::scalar(qt),
        )
    }

    fn two_player(a: f64) -> GameProblem {
        GameProblem::new(
            TimeMatrix::constant(Matrix::scalar(a)),
            vec![
                scalar_player(1.0, 2.0, 0.5, 0.1),
                scalar_player(0.7, 1.5, 0.3, 0.2),
            ],
            vec![1.0],
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_player_block_is_hamiltonian() {
        let a = Matrix::from_rows(&[&[0.1, 1.0], &[-0.3, 0.2]]);
        let b = Matrix::from_rows(&[&[0.0], &[1.0]]);
        let q = Matrix::diag(&[1.0, 0.5]);
        let r = Matrix::scalar(2.0);
        let qt = Matrix::diag(&[0.2, 0.1]);
        let lq = LQProblem::constant(
            a.clone(),
            b.clone(),
            q.clone(),
            r.clone(),
            qt.clone(),
            vec![1.0, 0.0],
            0.0,
            1.0,
        )
        .unwrap();
        let game = GameProblem::new(
            TimeMatrix::constant(a),
            vec![Player::constant(b, r, q, qt)],
            vec![1.0, 0.0],
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(
            game_block_matrix(&game, 0.0).unwrap(),
            hamiltonian_matrix(&lq, 0.0).unwrap()
        );
    }

    #[test]
    fn pollution_block_structure() {
        let (a, b) = (1.0, 1.0);
        let players = (1..=10)
            .map(|i| {
                let c = (10.0 + i as f64) / 2.0;
                scalar_player(b, c, 1.0 / c, 0.0)
            })
            .collect();
        let game = GameProblem::new(
            TimeMatrix::constant(Matrix::scalar(-a)),
            players,
            vec![10.0],
            0.0,
            1.0,
        )
        .unwrap();
        let k = game_block_matrix(&game, 0.3).unwrap();
        assert_eq!(k.shape(), (11, 11));
        assert_eq!(k[(0, 0)], -a);
        for i in 1..=10 {
            let c = (10.0 + i as f64) / 2.0;
            assert!((k[(0, i)] + b * b / c).abs() < 1e-16);
            assert!((k[(i, 0)] + 1.0 / c).abs() < 1e-16);
            assert_eq!(k[(i, i)], a);
            for j in 1..=10 {
                if j != i {
                    assert_eq!(k[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn uncoupled_players_give_block_diagonal() {
        let a = Matrix::from_rows(&[&[0.5, 1.0], &[0.0, -1.0]]);
        let zero_player = Player::constant(
            Matrix::zeros(2, 1),
            Matrix::scalar(1.0),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
        );
        let game = GameProblem::new(
            TimeMatrix::constant(a.clone()),
            vec![zero_player.clone(), zero_player],
            vec![0.0, 1.0],
            0.0,
            2.0,
        )
        .unwrap();
        let k = game_block_matrix(&game, 0.0).unwrap();
        let mut want = Matrix::zeros(6, 6);
        want.set_block(0, 0, &a);
        want.set_block(2, 2, &-&a.transpose());
        want.set_block(4, 4, &-&a.transpose());
        assert_eq!(k, want);
    }

    #[test]
    fn singular_control_weight_names_player() {
        let err = GameProblem::new(
            TimeMatrix::constant(Matrix::scalar(1.0)),
            vec![
                scalar_player(1.0, 1.0, 1.0, 0.0),
                scalar_player(1.0, 0.0, 1.0, 0.0),
            ],
            vec![1.0],
            0.0,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Player { player: 2, .. }));
    }

    #[test]
    fn zero_sum_needs_two_players() {
        let one = GameProblem::new(
            TimeMatrix::constant(Matrix::scalar(1.0)),
            vec![scalar_player(1.0, 1.0, 1.0, 0.0)],
            vec![1.0],
            0.0,
            1.0,
        )
        .unwrap();
        let r = TimeMatrix::constant(Matrix::scalar(1.0));
        assert!(one.with_zero_sum(r.clone(), r).is_err());
    }

    #[test]
    fn zero_sum_rhs_at_zero_gains() {
        let r = TimeMatrix::constant(Matrix::scalar(3.0));
        let game = two_player(0.4).with_zero_sum(r.clone(), r).unwrap();
        let z = Matrix::scalar(0.0);
        let (f1, f2) = zero_sum_rhs(&game, 0.5, &z, &z).unwrap();
        assert_eq!(f1, Matrix::scalar(-0.5));
        assert_eq!(f2, Matrix::scalar(-0.3));
    }

    #[test]
    fn zero_sum_rhs_decouples_without_coupling_terms() {
        // With B_2 = 0 and a vanishing cross weight on the first channel, the
        // first equation is the single-player Riccati right side.
        let game = GameProblem::new(
            TimeMatrix::constant(Matrix::scalar(0.4)),
            vec![
                scalar_player(1.0, 2.0, 0.5, 0.1),
                scalar_player(0.0, 1.5, 0.3, 0.2),
            ],
            vec![1.0],
            0.0,
            1.0,
        )
        .unwrap()
        .with_zero_sum(
            TimeMatrix::constant(Matrix::scalar(1.0)),
            TimeMatrix::constant(Matrix::scalar(1e300)),
        )
        .unwrap();
        let (p1, p2) = (Matrix::scalar(0.7), Matrix::scalar(1.1));
        let (f1, f2) = zero_sum_rhs(&game, 0.0, &p1, &p2).unwrap();
        let s1 = 0.5;
        assert!((f1[(0, 0)] - (-0.5 - 2.0 * 0.4 * 0.7 + 0.7 * s1 * 0.7)).abs() < 1e-15);
        assert!((f2[(0, 0)] - (-0.3 - 2.0 * 0.4 * 1.1 + 1.1 * s1 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn base_map_is_symmetric() {
        let r = TimeMatrix::constant(Matrix::scalar(2.0));
        let game = two_player(-0.6).with_zero_sum(r.clone(), r).unwrap();
        let p = [Matrix::scalar(0.4), Matrix::scalar(0.9)];
        // Symmetric up to the Taylor truncation, which is O(h^9).
        let h = 0.02;
        let fwd = zero_sum_base_map(&game, 0.2, h, &p).unwrap();
        let back = zero_sum_base_map(&game, 0.2 + h, -h, &fwd).unwrap();
        for i in 0..2 {
            let d = (&back[i] - &p[i]).max_abs();
            assert!(d < 1e-12, "{d:e}");
        }
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let r = TimeMatrix::constant(Matrix::scalar(2.0));
        let zs = two_player(-0.6).with_zero_sum(r.clone(), r).unwrap();
        assert!(matches!(
            solve_game(&zs, &crate::splitting::sp2(), 8, 8),
            Err(Error::Misuse(_))
        ));
        assert!(matches!(
            solve_zero_sum(&two_player(-0.6), 8, &[1.0], 8),
            Err(Error::Misuse(_))
        ));
    }
}
