#![allow(dead_code)]

use lqsplit_core::matfun::expm;
use lqsplit_core::{GameProblem, RiccatiSystem};

/// `x(T)` of a constant-coefficient scalar-state game by Gauss–Legendre
/// quadrature of `log x`, with the gains taken from `exp((t - T) K) [1; Q_T]`.
pub fn scalar_game_endpoint(g: &GameProblem, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        -0.906179845938664,
        -0.5384693101056831,
        0.0,
        0.5384693101056831,
        0.906179845938664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.2369268850561891,
        0.4786286704993665,
        0.5688888888888889,
        0.4786286704993665,
        0.2369268850561891,
    ];
    let k = g.flow_matrix(0.0).unwrap();
    let tf = g.t_final();
    let yt = g.terminal_flow();
    let channels = g.channels(0.0).unwrap();
    let a = g.drift(0.0).unwrap()[(0, 0)];
    let mut integral = 0.0;
    for p in 0..panels {
        let l = p as f64 / panels as f64 * tf;
        let r = (p + 1) as f64 / panels as f64 * tf;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let t = 0.5 * (l + r) + 0.5 * (r - l) * x;
            let y = &expm(&k.scale(t - tf)).unwrap() * &yt;
            let rate: f64 = a - channels
                .iter()
                .enumerate()
                .map(|(i, (s, _))| s[(0, 0)] * y[(i + 1, 0)] / y[(0, 0)])
                .sum::<f64>();
            integral += 0.5 * (r - l) * w * rate;
        }
    }
    g.x0()[0] * integral.exp()
}

/// Least-squares slope of `log e` against `log h`.
pub fn slope(hs: &[f64], es: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Classical RK4 on a plain vector field, used as an independent oracle.
pub fn rk4(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &[f64],
) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let add = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &add(&y, &k3, h));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

pub const FIG1_ENDPOINT: f64 = 3.492390041753503;
pub const FIG2_ENDPOINT: f64 = 1.3524337053706839;
