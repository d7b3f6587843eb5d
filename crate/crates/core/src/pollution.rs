//! Air-pollution emission game: `x' = -a(t) x + b(t) Σ u_i` with costs
//! `∫ e^{-ρt} (c_i u_i² + d_i x²) dt`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::games::{GameProblem, Player};
use crate::matfun::Matrix;
use crate::problem::TimeMatrix;

/// Scalar time function from a small catalog.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeFunction {
    Constant(f64),
    /// `base + amplitude * tanh(rate * (t - center))`.
    TanhRamp {
        base: f64,
        amplitude: f64,
        rate: f64,
        center: f64,
    },
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFunction::Constant(v) => v,
            TimeFunction::TanhRamp {
                base,
                amplitude,
                rate,
                center,
            } => base + amplitude * libm::tanh(rate * (t - center)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeFunction::Constant(_))
    }

    /// Smallest value on `[t0, t1]`; both catalog entries are monotone.
    fn min_on(&self, t0: f64, t1: f64) -> f64 {
        self.eval(t0).min(self.eval(t1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PollutionConfig {
    pub name: String,
    pub a: TimeFunction,
    pub b: TimeFunction,
    /// Emission cost weights, one per player.
    pub c: Vec<f64>,
    /// Pollution cost weights, one per player.
    pub d: Vec<f64>,
    pub rho: f64,
    pub t_final: f64,
    pub x0: f64,
}

impl PollutionConfig {
    pub fn players(&self) -> usize {
        self.c.len()
    }

    /// `N = 10`, `a = b = 1`, `c_i = 1/d_i = (10+i)/2`, `ρ = 0`.
    pub fn fig1() -> Self {
        Self::autonomous("fig1", 1.0, 10.0)
    }

    /// `N = 10`, `a = 2`, `b = 1`, `c_i = 1/d_i = (100+i)/2`, `ρ = 0`.
    pub fn fig2() -> Self {
        Self::autonomous("fig2", 2.0, 100.0)
    }

    /// `N = 1`, `a(t) = 2 + tanh(5(t - 1/2))`, `ρ = 1/10`, `c_1 = 1/d_1 = 11/2`.
    pub fn fig3a() -> Self {
        Self::ramp("fig3a", 11.0 / 2.0)
    }

    /// As [`fig3a`](Self::fig3a) with `c_1 = 1/d_1 = 101/2`.
    pub fn fig3b() -> Self {
        Self::ramp("fig3b", 101.0 / 2.0)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fig1" => Some(Self::fig1()),
            "fig2" => Some(Self::fig2()),
            "fig3a" => Some(Self::fig3a()),
            "fig3b" => Some(Self::fig3b()),
            _ => None,
        }
    }

    fn autonomous(name: &str, a: f64, offset: f64) -> Self {
        let c: Vec<f64> = (1..=10).map(|i| (offset + i as f64) / 2.0).collect();
        PollutionConfig {
            name: name.into(),
            a: TimeFunction::Constant(a),
            b: TimeFunction::Constant(1.0),
            d: c.iter().map(|c| 1.0 / c).collect(),
            c,
            rho: 0.0,
            t_final: 1.0,
            x0: 10.0,
        }
    }

    fn ramp(name: &str, c1: f64) -> Self {
        PollutionConfig {
            name: name.into(),
            a: TimeFunction::TanhRamp {
                base: 2.0,
                amplitude: 1.0,
                rate: 5.0,
                center: 0.5,
            },
            b: TimeFunction::Constant(1.0),
            c: alloc::vec![c1],
            d: alloc::vec![1.0 / c1],
            rho: 0.1,
            t_final: 1.0,
            x0: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(alloc::format!("{}: {msg}", self.name)));
        if self.c.is_empty() {
            return bad("at least one player is required".into());
        }
        if self.c.len() != self.d.len() {
            return bad(alloc::format!(
                "{} values of c but {} of d",
                self.c.len(),
                self.d.len()
            ));
        }
        for (i, (c, d)) in self.c.iter().zip(&self.d).enumerate() {
            if !(*c > 0.0 && c.is_finite()) {
                return bad(alloc::format!("c_{} must be positive (got {c})", i + 1));
            }
            if !(*d > 0.0 && d.is_finite()) {
                return bad(alloc::format!("d_{} must be positive (got {d})", i + 1));
            }
        }
        let b_min = self.b.min_on(0.0, self.t_final);
        let b_max = self.b.eval(0.0).max(self.b.eval(self.t_final));
        if b_min <= 0.0 && b_max >= 0.0 {
            return bad("b must not vanish".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(alloc::format!(
                "horizon must be positive (got {})",
                self.t_final
            ));
        }
        if !self.rho.is_finite() || !self.x0.is_finite() {
            return bad("rho and x0 must be finite".into());
        }
        Ok(())
    }

    pub fn is_autonomous(&self) -> bool {
        self.rho == 0.0 && self.a.is_constant() && self.b.is_constant()
    }
}

fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static, constant: Option<f64>) -> TimeMatrix {
    match constant {
        Some(v) => TimeMatrix::constant(Matrix::scalar(v)),
        None => TimeMatrix::scalar_fn(f),
    }
}

/// The game with `A = -a`, `B_i = b`, `Q_i = d_i e^{-ρt}`, `R_ii = c_i e^{-ρt}`
/// and `Q_iT = 0` on `[0, T]`.
pub fn build_pollution(config: &PollutionConfig) -> Result<GameProblem> {
    config.validate()?;
    let rho = config.rho;
    let a_fn = config.a;
    let b_fn = config.b;
    let a = scalar(
        move |t| -a_fn.eval(t),
        match a_fn {
            TimeFunction::Constant(v) => Some(-v),
            _ => None,
        },
    );
    let b = scalar(
        move |t| b_fn.eval(t),
        match b_fn {
            TimeFunction::Constant(v) => Some(v),
            _ => None,
        },
    );
    let discounted = |w: f64| {
        if rho == 0.0 {
            TimeMatrix::constant(Matrix::scalar(w))
        } else {
            TimeMatrix::scalar_fn(move |t| w * libm::exp(-rho * t))
        }
    };
    let players = config
        .c
        .iter()
        .zip(&config.d)
        .map(|(&c, &d)| Player::new(b.clone(), discounted(c), discounted(d), Matrix::scalar(0.0)))
        .collect();
    GameProblem::new(a, players, alloc::vec![config.x0], 0.0, config.t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::RiccatiSystem;

    #[test]
    fn presets_match_captions() {
        let f1 = PollutionConfig::fig1();
        assert_eq!(f1.players(), 10);
        assert_eq!(f1.c[0], 5.5);
        assert_eq!(f1.c[9], 10.0);
        assert!(f1
            .c
            .iter()
            .zip(&f1.d)
            .all(|(c, d)| (c * d - 1.0).abs() < 1e-15));
        assert!(f1.is_autonomous());
        let f2 = PollutionConfig::fig2();
        assert_eq!(f2.a, TimeFunction::Constant(2.0));
        assert_eq!(f2.c[0], 50.5);
        let f3 = PollutionConfig::fig3b();
        assert_eq!(f3.c, alloc::vec![50.5]);
        assert_eq!(f3.a.eval(0.5), 2.0);
        assert!(!f3.is_autonomous());
    }

    #[test]
    fn autonomous_preset_builds_constant_game() {
        let g = build_pollution(&PollutionConfig::fig1()).unwrap();
        assert!(g.is_autonomous());
        assert_eq!(RiccatiSystem::players(&g), 10);
        assert_eq!(g.x0(), &[10.0]);
    }

    #[test]
    fn discounted_weights() {
        let g = build_pollution(&PollutionConfig::fig3a()).unwrap();
        assert!(!g.is_autonomous());
        let t = 0.7;
        let (s, _) = g.channels(t).unwrap().swap_remove(0);
        assert!((s[(0, 0)] - libm::exp(0.1 * t) / 5.5).abs() < 1e-15);
        assert!((g.drift(t).unwrap()[(0, 0)] + 2.0 + libm::tanh(5.0 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let mut cfg = PollutionConfig::fig1();
        cfg.c[3] = 0.0;
        assert!(matches!(build_pollution(&cfg), Err(Error::Config(_))));
        let mut cfg = PollutionConfig::fig1();
        cfg.d[0] = -1.0;
        assert!(matches!(build_pollution(&cfg), Err(Error::Config(_))));
        let mut cfg = PollutionConfig::fig1();
        cfg.b = TimeFunction::Constant(0.0);
        assert!(matches!(build_pollution(&cfg), Err(Error::Config(_))));
    }
}
