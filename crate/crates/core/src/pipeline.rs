//! Backward-then-forward solution pipeline and the trajectory it produces.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matfun::{symmetric_eigenvalues, symmetry_defect, Matrix};
use crate::problem::RiccatiSystem;
use crate::reference::{self, FlatODE};
use crate::riccati::{self, BackwardMethod, RiccatiFlow};
use crate::splitting::{
    self, compose, ExtendedState, NearIntegrableStepper, S2Step, SplittingScheme, SplittingStepper,
    StepMap,
};

/// Forward integrator choice.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Exact-flow splitting; the autonomous engine is used when the system
    /// has constant coefficients, the two-time-coordinate engine otherwise.
    Splitting(SplittingScheme),
    /// Exact-flow splitting forced through the two-time-coordinate engine.
    SplittingNonAutonomous(SplittingScheme),
    /// Composition of the symmetric Padé-based second-order map.
    S2Composition(Vec<f64>),
    /// Near-integrable splitting around a constant dominant drift.
    NearIntegrable {
        scheme: SplittingScheme,
        dominant: Matrix,
    },
    Rk4,
    Dopri {
        abs_tol: f64,
        rel_tol: f64,
    },
}

impl Method {
    /// Resolve a CLI-style name. Near-integrable schemes need the dominant
    /// drift; `dopri` needs tolerances and is built with [`Method::dopri`].
    pub fn from_name(name: &str, dominant: Option<Matrix>) -> Result<Method> {
        match name {
            "rk4" => Ok(Method::Rk4),
            "s2c4" => Ok(Method::S2Composition(splitting::order4_composition_alphas())),
            "ni42" | "ni84" => Ok(Method::NearIntegrable {
                scheme: SplittingScheme::by_name(name).expect("builtin"),
                dominant: dominant.ok_or(Error::Misuse(
                    "near-integrable method needs a dominant drift",
                ))?,
            }),
            "dopri" => Err(Error::Misuse(
                "dopri is selected by tolerance; use Method::dopri",
            )),
            other => SplittingScheme::by_name(other)
                .map(Method::Splitting)
                .ok_or_else(|| Error::Config(alloc::format!("unknown method `{other}`"))),
        }
    }

    /// Tolerance ladder entry `AbsTol = 10^-i`, `RelTol = 10^(1-i)`.
    pub fn dopri(tol_exponent: i32) -> Method {
        Method::Dopri {
            abs_tol: libm::pow(10.0, -(tol_exponent as f64)),
            rel_tol: libm::pow(10.0, (1 - tol_exponent) as f64),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::Splitting(s) => s.name.clone(),
            Method::SplittingNonAutonomous(s) => alloc::format!("{}-na", s.name),
            Method::S2Composition(alphas) if *alphas == splitting::order4_composition_alphas() => {
                "s2c4".into()
            }
            Method::S2Composition(alphas) => alloc::format!("s2x{}", alphas.len()),
            Method::NearIntegrable { scheme, .. } => scheme.name.clone(),
            Method::Rk4 => "rk4".into(),
            Method::Dopri { .. } => "dopri".into(),
        }
    }
}

/// State, gains and controls at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    /// Raw `P_i = V_i U^{-1}` per player.
    pub gains: Vec<Matrix>,
    pub controls: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub method: String,
    pub samples: Vec<Sample>,
    /// Native forward cost: splitting stages, composed base maps, or
    /// right-hand-side evaluations for Runge–Kutta baselines.
    pub evaluations: usize,
    /// CF4 steps spent in the backward pass (zero for the exponential route).
    pub backward_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn final_state(&self) -> &[f64] {
        &self.last().x
    }

    /// `max_i ‖P_i(T) - Q_iT‖_max`.
    pub fn terminal_gain_defect(&self, terminal: &[Matrix]) -> f64 {
        self.last()
            .gains
            .iter()
            .zip(terminal)
            .map(|(p, q)| (p - q).max_abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the symmetrized terminal gains.
    pub fn min_terminal_eigenvalue(&self) -> f64 {
        min_gain_eigenvalue(&self.last().gains)
    }

    /// Smallest eigenvalue of the symmetrized gains over every sample.
    pub fn min_path_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| min_gain_eigenvalue(&s.gains))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `‖P_i - P_iᵀ‖_∞` over every sample.
    pub fn max_symmetry_defect(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.gains.iter())
            .map(|p| symmetry_defect(p).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

fn min_gain_eigenvalue(gains: &[Matrix]) -> f64 {
    gains
        .iter()
        .flat_map(|p| symmetric_eigenvalues(&p.symmetrized()))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn sample_of<S: RiccatiSystem + ?Sized>(
    sys: &S,
    t: f64,
    flow: &RiccatiFlow,
    x: &[f64],
) -> Result<Sample> {
    let gains = flow.raw_gains()?;
    let controls = sys.controls(t, &gains, x)?;
    Ok(Sample {
        t,
        x: x.to_vec(),
        gains,
        controls,
    })
}

/// Integrate forward from `flow0` (valid at `sys.t0()`) over `steps` uniform
/// steps, sampling at every step end.
pub fn solve_forward<S: RiccatiSystem + ?Sized>(
    sys: &S,
    flow0: &RiccatiFlow,
    method: &Method,
    steps: usize,
) -> Result<Trajectory> {
    let (t0, tf) = (sys.t0(), sys.t_final());
    if steps == 0 && !matches!(method, Method::Dopri { .. }) {
        return Err(Error::Input("forward pass needs steps >= 1".into()));
    }
    let start = ExtendedState::new(flow0.clone(), sys.x0().to_vec());
    match method {
        Method::Splitting(scheme) => {
            let mut stepper = SplittingStepper::auto(sys, scheme.clone())?;
            run_step_map(sys, &mut stepper, start, steps, &method.name())
        }
        Method::SplittingNonAutonomous(scheme) => {
            let mut stepper = SplittingStepper::nonautonomous(sys, scheme.clone());
            run_step_map(sys, &mut stepper, start, steps, &method.name())
        }
        Method::S2Composition(alphas) => {
            let mut stepper = compose(S2Step::new(sys), alphas.clone())?;
            run_step_map(sys, &mut stepper, start, steps, &method.name())
        }
        Method::NearIntegrable { scheme, dominant } => {
            let mut stepper =
                NearIntegrableStepper::new(sys, scheme.clone(), Some(dominant.clone()))?;
            run_step_map(sys, &mut stepper, start, steps, &method.name())
        }
        Method::Rk4 => {
            let mut ode = coupled_ode(sys);
            let h = (tf - t0) / steps as f64;
            let mut y = pack(flow0, sys.x0());
            let mut samples = vec![sample_of(sys, t0, flow0, sys.x0())?];
            for k in 0..steps {
                let t = t0 + k as f64 * h;
                y = reference::rk4_step(&mut ode, t, h, &y)?;
                let (flow, x) = unpack(flow0, &y, t + h)?;
                samples.push(sample_of(sys, t + h, &flow, &x)?);
            }
            Ok(Trajectory {
                method: method.name(),
                samples,
                evaluations: ode.evaluations(),
                backward_steps: 0,
            })
        }
        Method::Dopri { abs_tol, rel_tol } => {
            let mut ode = coupled_ode(sys);
            let mut samples = vec![sample_of(sys, t0, flow0, sys.x0())?];
            let y0 = pack(flow0, sys.x0());
            reference::adaptive_solve_observed(
                &mut ode,
                t0,
                tf,
                &y0,
                *abs_tol,
                *rel_tol,
                |t, y| {
                    let (flow, x) = unpack(flow0, y, t)?;
                    samples.push(sample_of(sys, t, &flow, &x)?);
                    Ok(())
                },
            )?;
            Ok(Trajectory {
                method: method.name(),
                samples,
                evaluations: ode.evaluations(),
                backward_steps: 0,
            })
        }
    }
}

pub(crate) fn run_step_map<S: RiccatiSystem + ?Sized, M: StepMap>(
    sys: &S,
    stepper: &mut M,
    start: ExtendedState,
    steps: usize,
    name: &str,
) -> Result<Trajectory> {
    let h = (sys.t_final() - sys.t0()) / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(sample_of(sys, start.t1, &start.flow, &start.x)?);
    let mut state = start;
    for _ in 0..steps {
        state = stepper.step(h, &state)?;
        samples.push(sample_of(sys, state.t1, &state.flow, &state.x)?);
    }
    Ok(Trajectory {
        method: name.into(),
        samples,
        evaluations: stepper.evaluations(),
        backward_steps: 0,
    })
}

/// Backward pass followed by the forward pass.
pub fn solve<S: RiccatiSystem + ?Sized>(
    sys: &S,
    method: &Method,
    steps: usize,
    backward: BackwardMethod,
) -> Result<Trajectory> {
    let pass = riccati::backward(sys, backward)?;
    let mut traj = solve_forward(sys, &pass.flow, method, steps)?;
    traj.backward_steps = pass.magnus_steps;
    Ok(traj)
}

/// Column-major-free packing: the stacked flow entries followed by `x`.
pub(crate) fn pack(flow: &RiccatiFlow, x: &[f64]) -> Vec<f64> {
    let mut y = flow.stacked().as_slice().to_vec();
    y.extend_from_slice(x);
    y
}

pub(crate) fn unpack(template: &RiccatiFlow, y: &[f64], t: f64) -> Result<(RiccatiFlow, Vec<f64>)> {
    let m = template.stacked();
    let len = m.rows() * m.cols();
    let stacked = Matrix::new(m.rows(), m.cols(), y[..len].to_vec())?;
    Ok((RiccatiFlow::from_stacked(stacked, t)?, y[len..].to_vec()))
}

/// The forward coupled system `v' = K(t) v`, `x' = (A - Σ S_i V_i U^{-1}) x`
/// as a flat vector field.
pub fn coupled_ode<'a, S: RiccatiSystem + ?Sized>(sys: &'a S) -> FlatODE<'a> {
    let n = sys.state_dim();
    let rows = (sys.players() + 1) * n;
    let len = rows * n;
    FlatODE::new(len + n, move |t, y, out| {
        let v = Matrix::new(rows, n, y[..len].to_vec())?;
        let k = sys.flow_matrix(t)?;
        let dv = &k * &v;
        out[..len].copy_from_slice(dv.as_slice());
        let flow = RiccatiFlow::from_stacked(v, t)?;
        let gains = flow.raw_gains()?;
        let dx = sys.closed_loop(t, &gains)?.mul_vec(&y[len..])?;
        out[len..].copy_from_slice(&dx);
        Ok(())
    })
}
