mod common;

use common::{rk4, scalar_game_endpoint, slope, FIG1_ENDPOINT, FIG2_ENDPOINT};
use lqsplit_core::games::{zero_sum_rhs, GameProblem, Player};
use lqsplit_core::magnus::{cf4_step_with, integrate_with};
use lqsplit_core::matfun::expm;
use lqsplit_core::pipeline::{solve, Method};
use lqsplit_core::problem::{closed_loop_matrix, s_matrix};
use lqsplit_core::riccati::{
    backward, backward_autonomous, backward_nonautonomous, BackwardMethod,
};
use lqsplit_core::{
    build_pollution, LQProblem, Matrix, PollutionConfig, RiccatiSystem, TimeMatrix,
};
use proptest::prelude::*;

fn taylor_expm(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut squarings = 0;
    let mut scaled = m.clone();
    while scaled.norm_1() > 0.25 {
        scaled = scaled.scale(0.5);
        squarings += 1;
    }
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=40 {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn naive_mul(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

fn dense(n: usize, m: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-1.0f64..1.0, n * m).prop_map(move |d| Matrix::new(n, m, d).unwrap())
}

fn spd(n: usize) -> impl Strategy<Value = Matrix> {
    dense(n, n).prop_map(move |g| &naive_mul(&g.transpose(), &g) + &Matrix::identity(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expm_matches_taylor_oracle(m in dense(4, 4)) {
        let m = m.scale(1.0 / m.norm_1().max(1.0));
        let e = expm(&m).unwrap();
        prop_assert!((&e - &taylor_expm(&m)).max_abs() <= 1e-13);
    }

    #[test]
    fn s_matrix_matches_triple_product(b in dense(3, 2), r in spd(2), a in dense(3, 3), p in dense(3, 3)) {
        let prob = LQProblem::constant(
            a.clone(), b.clone(), Matrix::identity(3), r.clone(), Matrix::zeros(3, 3), vec![0.0; 3], 0.0, 1.0,
        ).unwrap();
        let ri = r.inverse().unwrap();
        let oracle = naive_mul(&naive_mul(&b, &ri), &b.transpose());
        let s = s_matrix(&prob, 0.3).unwrap();
        prop_assert!((&s - &oracle).max_abs() <= 1e-13);
        let cl = closed_loop_matrix(&prob, 0.3, &p).unwrap();
        prop_assert!((&cl - &(&a - &naive_mul(&s, &p))).max_abs() <= 1e-14);
    }

    #[test]
    fn zero_sum_rhs_matches_term_by_term_oracle(
        a in dense(2, 2), b1 in dense(2, 1), b2 in dense(2, 1),
        q1 in spd(2), q2 in spd(2), p1 in spd(2), p2 in spd(2),
        r in proptest::collection::vec(0.5f64..2.0, 4),
    ) {
        let (p1, p2) = (p1.scale(0.1), p2.scale(0.1));
        let player = |b: &Matrix, r: f64, q: &Matrix| Player::constant(b.clone(), Matrix::scalar(r), q.clone(), Matrix::zeros(2, 2));
        let game = GameProblem::new(
            TimeMatrix::constant(a.clone()),
            vec![player(&b1, r[0], &q1), player(&b2, r[1], &q2)],
            vec![1.0, 0.0], 0.0, 1.0,
        ).unwrap()
        .with_zero_sum(TimeMatrix::constant(Matrix::scalar(r[2])), TimeMatrix::constant(Matrix::scalar(r[3]))).unwrap();
        let outer = |b: &Matrix, w: f64| naive_mul(b, &b.transpose()).scale(1.0 / w);
        let (s1, s2) = (outer(&b1, r[0]), outer(&b2, r[1]));
        let (c1, c2) = (outer(&b2, r[2]), outer(&b1, r[3]));
        let tri = |x: &Matrix, y: &Matrix, z: &Matrix| naive_mul(&naive_mul(x, y), z);
        let lin = |p: &Matrix, q: &Matrix| &(&(-q) - &naive_mul(&a.transpose(), p)) - &naive_mul(p, &a);
        let o1 = &(&(&lin(&p1, &q1) + &tri(&p1, &s1, &p1)) + &tri(&p1, &s2, &p2)) + &tri(&p2, &c1, &p2);
        let o2 = &(&(&lin(&p2, &q2) + &tri(&p2, &s2, &p2)) + &tri(&p2, &s1, &p1)) + &tri(&p1, &c2, &p1);
        let (f1, f2) = zero_sum_rhs(&game, 0.0, &p1, &p2).unwrap();
        prop_assert!((&f1 - &o1).max_abs() <= 1e-14);
        prop_assert!((&f2 - &o2).max_abs() <= 1e-14);
    }
}

fn fig1() -> GameProblem {
    build_pollution(&PollutionConfig::fig1()).unwrap()
}

#[test]
fn fig1_s_matrix_for_first_player() {
    let prob = LQProblem::constant(
        Matrix::scalar(-1.0),
        Matrix::scalar(1.0),
        Matrix::scalar(2.0 / 11.0),
        Matrix::scalar(5.5),
        Matrix::scalar(0.0),
        vec![10.0],
        0.0,
        1.0,
    )
    .unwrap();
    assert!((s_matrix(&prob, 0.0).unwrap()[(0, 0)] - 2.0 / 11.0).abs() < 1e-16);
}

#[test]
fn cf4_is_fourth_order_on_noncommuting_coefficients() {
    let a0 = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let a1 = Matrix::from_rows(&[&[0.5, 0.0], &[0.3, -0.5]]);
    let field = |t: f64| Ok(a0.axpy(libm::cos(t), &a1));
    let y0 = Matrix::column(&[1.0, 0.5]);
    let (reference, _) = integrate_with(field, 0.0, 2.0, 4096, &y0).unwrap();
    let steps = [8usize, 16, 32, 64];
    let errors: Vec<f64> = steps
        .iter()
        .map(|&k| (&integrate_with(field, 0.0, 2.0, k, &y0).unwrap().0 - &reference).max_abs())
        .collect();
    let hs: Vec<f64> = steps.iter().map(|&k| 2.0 / k as f64).collect();
    let p = slope(&hs, &errors);
    assert!((p - 4.0).abs() < 0.2, "slope {p}");
}

#[test]
fn cf4_round_trip() {
    let field = |t: f64| {
        Ok(Matrix::from_rows(&[
            &[libm::sin(t), 1.0],
            &[-2.0, -0.3 * t],
        ]))
    };
    let y0 = Matrix::column(&[0.2, -1.0]);
    let (y1, work) = integrate_with(field, 0.0, 1.5, 37, &y0).unwrap();
    let (back, _) = integrate_with(field, 1.5, 0.0, 37, &y1).unwrap();
    assert!((&back - &y0).max_abs() < 1e-10);
    assert_eq!((work.matrix_samples, work.exponentials), (111, 74));
    let one = cf4_step_with(field, 0.0, 1.5, &y0).unwrap();
    assert_eq!(one, integrate_with(field, 0.0, 1.5, 1, &y0).unwrap().0);
}

#[test]
fn fig1_backward_pass_matches_riccati_oracle() {
    let g = fig1();
    let flow = backward_autonomous_game(&g);
    let p0 = flow.raw_gains().unwrap();
    let channels = g.channels(0.0).unwrap();
    let s: Vec<f64> = channels.iter().map(|(s, _)| s[(0, 0)]).collect();
    let q: Vec<f64> = (0..10).map(|i| PollutionConfig::fig1().d[i]).collect();
    // P_i' = -q_i + 2 P_i + P_i Σ s_j P_j with a = 1.
    let rhs = |_t: f64, p: &[f64]| -> Vec<f64> {
        let coupling: f64 = s.iter().zip(p).map(|(s, p)| s * p).sum();
        p.iter()
            .zip(&q)
            .map(|(p, q)| -q + 2.0 * p + p * coupling)
            .collect()
    };
    let oracle = rk4(rhs, 1.0, 0.0, 4000, &[0.0; 10]);
    for (p, o) in p0.iter().zip(&oracle) {
        assert!((p[(0, 0)] - o).abs() < 1e-10);
    }
}

fn backward_autonomous_game(g: &GameProblem) -> lqsplit_core::RiccatiFlow {
    backward(g, BackwardMethod::Exponential).unwrap().flow
}

fn scalar_lq(a: TimeMatrix, b: f64, q: f64) -> LQProblem {
    LQProblem::new(
        a,
        TimeMatrix::constant(Matrix::scalar(b)),
        TimeMatrix::constant(Matrix::scalar(q)),
        TimeMatrix::constant(Matrix::scalar(1.0)),
        Matrix::scalar(0.25),
        vec![1.0],
        0.0,
        1.0,
    )
    .unwrap()
}

#[test]
fn magnus_backward_agrees_with_exponential() {
    let p = LQProblem::constant(
        Matrix::from_rows(&[&[-0.5, 1.0], &[0.0, 0.3]]),
        Matrix::column(&[0.0, 1.0]),
        Matrix::identity(2),
        Matrix::scalar(2.0),
        Matrix::diag(&[0.1, 0.2]),
        vec![1.0, 1.0],
        0.0,
        1.0,
    )
    .unwrap();
    let exact = backward_autonomous(&p).unwrap();
    let cf4 = backward_nonautonomous(&p, 64).unwrap();
    assert!((exact.stacked() - cf4.stacked()).max_abs() < 1e-10);
}

#[test]
fn magnus_backward_pure_transport() {
    let ramp = |t: f64| 2.0 + libm::tanh(5.0 * (t - 0.5));
    let p = scalar_lq(TimeMatrix::scalar_fn(ramp), 0.0, 0.0);
    let flow = backward_nonautonomous(&p, 64).unwrap();
    // The ramp integrates to 2 over [0, 1] by odd symmetry about t = 1/2.
    assert!((flow.u()[(0, 0)] - (-2.0f64).exp()).abs() < 1e-10);
    assert!((flow.v(0)[(0, 0)] - 0.25 * 2.0f64.exp()).abs() < 1e-9);
}

#[test]
fn magnus_backward_converges_at_fourth_order() {
    let g = build_pollution(&PollutionConfig::fig3a()).unwrap();
    let p_of = |steps| {
        backward(&g, BackwardMethod::Magnus { steps })
            .unwrap()
            .flow
            .raw_gains()
            .unwrap()[0][(0, 0)]
    };
    let fine = p_of(640);
    let e1 = (p_of(16) - fine).abs();
    let e2 = (p_of(32) - fine).abs();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
}

#[test]
fn frozen_endpoints_match_quadrature_oracle() {
    let x1 = scalar_game_endpoint(&fig1(), 400);
    assert!((x1 - FIG1_ENDPOINT).abs() < 1e-13, "{x1:.17}");
    let x2 = scalar_game_endpoint(&build_pollution(&PollutionConfig::fig2()).unwrap(), 400);
    assert!((x2 - FIG2_ENDPOINT).abs() < 1e-13, "{x2:.17}");
    let coarse = scalar_game_endpoint(&fig1(), 200);
    assert!((coarse - x1).abs() < 1e-14);
}

#[test]
fn adaptive_solver_agrees_with_frozen_endpoint() {
    let g = fig1();
    let tr = solve(&g, &Method::dopri(13), 1, BackwardMethod::Exponential).unwrap();
    assert!((tr.final_state()[0] - FIG1_ENDPOINT).abs() < 1e-11);
}

#[test]
fn adaptive_solver_work_grows_as_error_shrinks() {
    let g = fig1();
    let runs: Vec<(usize, f64)> = (4..=10)
        .step_by(2)
        .map(|i| {
            let tr = solve(&g, &Method::dopri(i), 1, BackwardMethod::Exponential).unwrap();
            (tr.evaluations, (tr.final_state()[0] - FIG1_ENDPOINT).abs())
        })
        .collect();
    for w in runs.windows(2) {
        assert!(w[1].0 > w[0].0, "{runs:?}");
        assert!(w[1].1 < w[0].1, "{runs:?}");
    }
}

#[test]
fn sp4_error_ratio_on_fig1() {
    let g = fig1();
    let m = Method::from_name("sp4", None).unwrap();
    let err = |k| {
        (solve(&g, &m, k, BackwardMethod::Exponential)
            .unwrap()
            .final_state()[0]
            - FIG1_ENDPOINT)
            .abs()
    };
    let ratio = err(8) / err(16);
    assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
}

#[test]
fn controls_vanish_at_the_horizon() {
    let g = fig1();
    let tr = solve(
        &g,
        &Method::from_name("sp4", None).unwrap(),
        16,
        BackwardMethod::Exponential,
    )
    .unwrap();
    for u in &tr.last().controls {
        assert!(u[0].abs() < 1e-12, "{u:?}");
    }
}
