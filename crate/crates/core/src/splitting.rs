//! Splitting schemes and the forward stepping engines for the coupled
//! Riccati/state system.
//!
//! A scheme is a sequence of coefficient pairs `(a_i, b_i)`, applied in order
//! `a_1, b_1, a_2, b_2, ...`. The `a` maps advance the state `x` with the
//! Riccati flow frozen; the `b` maps advance the flow `v = [U; V]` with the
//! state frozen.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::magnus;
use crate::matfun::{expm, pade2, Matrix};
use crate::problem::RiccatiSystem;
use crate::riccati::RiccatiFlow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    General,
    /// Tuned for a dominant exactly solvable part plus a small perturbation;
    /// `limit_order` is the order reached as the perturbation vanishes.
    NearIntegrable {
        limit_order: u32,
    },
    Composition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingScheme {
    pub name: String,
    /// State-advance coefficients.
    pub a: Vec<f64>,
    /// Riccati-advance coefficients.
    pub b: Vec<f64>,
    pub order: u32,
    /// Cost per step in stages once first-same-as-last reuse is accounted for.
    pub stages: usize,
    pub symmetric: bool,
    pub fsal: bool,
    pub kind: SchemeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MapKind {
    State,
    Flow,
}

impl SplittingScheme {
    /// Build a scheme from its pair sequence; symmetry, FSAL and the stage count
    /// are derived from the coefficients.
    pub fn new(name: &str, a: Vec<f64>, b: Vec<f64>, order: u32, kind: SchemeKind) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Config(alloc::format!(
                "scheme {name}: coefficient lists must be non-empty and of equal length"
            )));
        }
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        if (sa - 1.0).abs() > 1e-14 || (sb - 1.0).abs() > 1e-14 {
            return Err(Error::Config(alloc::format!(
                "scheme {name}: coefficients must sum to one (got {sa}, {sb})"
            )));
        }
        let seq = nontrivial_maps(&a, &b);
        let symmetric = seq.iter().zip(seq.iter().rev()).all(|(x, y)| x == y);
        let fsal = seq.len() > 1 && seq.first() == seq.last();
        let pairs = a
            .iter()
            .zip(&b)
            .filter(|(x, y)| **x != 0.0 || **y != 0.0)
            .count();
        Ok(SplittingScheme {
            name: name.into(),
            a,
            b,
            order,
            stages: if fsal { pairs - 1 } else { pairs },
            symmetric,
            fsal,
            kind,
        })
    }

    pub fn pairs(&self) -> usize {
        self.a.len()
    }

    pub fn by_name(name: &str) -> Option<SplittingScheme> {
        builtin_schemes().into_iter().find(|s| s.name == name)
    }
}

fn nontrivial_maps(a: &[f64], b: &[f64]) -> Vec<(MapKind, u64)> {
    let mut seq = Vec::new();
    for (x, y) in a.iter().zip(b) {
        if *x != 0.0 {
            seq.push((MapKind::State, x.to_bits()));
        }
        if *y != 0.0 {
            seq.push((MapKind::Flow, y.to_bits()));
        }
    }
    seq
}

/// Lie–Trotter.
pub fn sp1() -> SplittingScheme {
    SplittingScheme::new("sp1", vec![1.0], vec![1.0], 1, SchemeKind::General).expect("valid")
}

/// Leapfrog / Strang: `a/2, b, a/2`.
pub fn sp2() -> SplittingScheme {
    SplittingScheme::new(
        "sp2",
        vec![0.5, 0.5],
        vec![1.0, 0.0],
        2,
        SchemeKind::General,
    )
    .expect("valid")
}

/// Six-stage fourth-order symmetric scheme with a leading zero `a`.
pub fn sp4() -> SplittingScheme {
    let b1 = 0.0792036964311957;
    let b2 = 0.353172906049774;
    let b3 = -0.0420650803577195;
    let b4 = 1.0 - 2.0 * (b1 + b2 + b3);
    let a2 = 0.209515106613362;
    let a3 = -0.143851773179818;
    let a4 = 0.5 - (a2 + a3);
    SplittingScheme::new(
        "sp4",
        vec![0.0, a2, a3, a4, a4, a3, a2],
        vec![b1, b2, b3, b4, b3, b2, b1],
        4,
        SchemeKind::General,
    )
    .expect("valid")
}

/// Ten-stage sixth-order symmetric scheme.
pub fn sp6() -> SplittingScheme {
    let a1 = 0.0502627644003922;
    let a2 = 0.413514300428344;
    let a3 = 0.0450798897943977;
    let a4 = -0.188054853819569;
    let a5 = 0.541960678450780;
    let a6 = 1.0 - 2.0 * (a1 + a2 + a3 + a4 + a5);
    let b1 = 0.148816447901042;
    let b2 = -0.132385865767784;
    let b3 = 0.067307604692185;
    let b4 = 0.432666402578175;
    let b5 = 0.5 - (b1 + b2 + b3 + b4);
    SplittingScheme::new(
        "sp6",
        vec![a1, a2, a3, a4, a5, a6, a5, a4, a3, a2, a1],
        vec![b1, b2, b3, b4, b5, b5, b4, b3, b2, b1, 0.0],
        6,
        SchemeKind::General,
    )
    .expect("valid")
}

/// Near-integrable (4,2) scheme `a1 b1 a2 b1 a1`.
pub fn ni42() -> SplittingScheme {
    let a1 = (3.0 - libm::sqrt(3.0)) / 6.0;
    let a2 = 1.0 - 2.0 * a1;
    let b1 = 0.5;
    SplittingScheme::new(
        "ni42",
        vec![a1, a2, a1],
        vec![b1, b1, 0.0],
        2,
        SchemeKind::NearIntegrable { limit_order: 4 },
    )
    .expect("valid")
}

/// Near-integrable (8,4) scheme `a1 b1 a2 b2 a3 b3 a3 b2 a2 b1 a1`.
#[allow(clippy::excessive_precision)]
pub fn ni84() -> SplittingScheme {
    let a1 = 0.07534696026989288842;
    let a2 = 0.5179168546882567823;
    let a3 = 0.5 - (a1 + a2);
    let b1 = 0.19022593937367661925;
    let b2 = 0.84652407044352625706;
    let b3 = 1.0 - 2.0 * (b1 + b2);
    SplittingScheme::new(
        "ni84",
        vec![a1, a2, a3, a3, a2, a1],
        vec![b1, b2, b3, b2, b1, 0.0],
        4,
        SchemeKind::NearIntegrable { limit_order: 8 },
    )
    .expect("valid")
}

pub fn builtin_schemes() -> Vec<SplittingScheme> {
    vec![sp1(), sp2(), sp4(), sp6(), ni42(), ni84()]
}

/// Composition weights `(α1, α1, α2, α1, α1)` of the five-stage fourth-order
/// composition of a symmetric second-order map.
pub fn order4_composition_alphas() -> Vec<f64> {
    let c = libm::cbrt(4.0);
    let a1 = 1.0 / (4.0 - c);
    let a2 = -c / (4.0 - c);
    vec![a1, a1, a2, a1, a1]
}

/// Riccati flow, state and the two time coordinates driving the frozen-time
/// sub-flows.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    pub flow: RiccatiFlow,
    pub x: Vec<f64>,
    /// Time at which the flow `v` is valid; drives the state matrix.
    pub t1: f64,
    /// Time at which the state `x` is valid; drives the flow matrix.
    pub t2: f64,
}

impl ExtendedState {
    pub fn new(flow: RiccatiFlow, x: Vec<f64>) -> Self {
        let t = flow.t;
        ExtendedState {
            flow,
            x,
            t1: t,
            t2: t,
        }
    }

    pub fn time(&self) -> f64 {
        self.t1
    }

    fn gains(&self) -> Result<Vec<Matrix>> {
        self.flow.raw_gains()
    }

    fn with_flow(&self, y: Matrix, t1: f64) -> RiccatiFlow {
        self.flow.with_stacked(y, t1)
    }
}

/// A one-step map of the extended state.
pub trait StepMap {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState>;

    /// Native cost counter: stages (or base-map applications) evaluated so far.
    fn evaluations(&self) -> usize;

    fn name(&self) -> String;
}

#[derive(Clone, Debug)]
struct FsalEntry {
    kind: MapKind,
    h: f64,
    t1: f64,
    t2: f64,
    v: Option<Matrix>,
    map: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Autonomous,
    NonAutonomous,
}

/// Stepping engine for Table-style splitting schemes with exact sub-flows.
///
/// The autonomous engine caches the flow exponentials `E_i = exp(b_i h K)` per
/// step size; the non-autonomous engine evaluates `K` at the running second
/// time coordinate.
pub struct SplittingStepper<'a, S: RiccatiSystem + ?Sized> {
    sys: &'a S,
    scheme: SplittingScheme,
    engine: Engine,
    constant_k: Option<Matrix>,
    flow_cache: Option<(u64, Vec<Option<Matrix>>)>,
    fsal: Option<FsalEntry>,
    evaluations: usize,
}

impl<'a, S: RiccatiSystem + ?Sized> SplittingStepper<'a, S> {
    pub fn autonomous(sys: &'a S, scheme: SplittingScheme) -> Result<Self> {
        if !sys.is_autonomous() {
            return Err(Error::Misuse(
                "autonomous splitting engine needs constant coefficients",
            ));
        }
        let k = sys.flow_matrix(sys.t0())?;
        Ok(SplittingStepper {
            sys,
            scheme,
            engine: Engine::Autonomous,
            constant_k: Some(k),
            flow_cache: None,
            fsal: None,
            evaluations: 0,
        })
    }

    pub fn nonautonomous(sys: &'a S, scheme: SplittingScheme) -> Self {
        SplittingStepper {
            sys,
            scheme,
            engine: Engine::NonAutonomous,
            constant_k: None,
            flow_cache: None,
            fsal: None,
            evaluations: 0,
        }
    }

    /// Autonomous engine when the system allows it, otherwise the
    /// two-time-coordinate engine.
    pub fn auto(sys: &'a S, scheme: SplittingScheme) -> Result<Self> {
        if sys.is_autonomous() {
            Self::autonomous(sys, scheme)
        } else {
            Ok(Self::nonautonomous(sys, scheme))
        }
    }

    pub fn scheme(&self) -> &SplittingScheme {
        &self.scheme
    }

    fn cached_flow_exps(&mut self, h: f64) -> Result<&Vec<Option<Matrix>>> {
        let stale = !matches!(&self.flow_cache, Some((bits, _)) if *bits == h.to_bits());
        if stale {
            let k = self.constant_k.as_ref().expect("autonomous engine");
            let exps = self
                .scheme
                .b
                .iter()
                .map(|&b| {
                    if b == 0.0 {
                        Ok(None)
                    } else {
                        expm(&k.scale(b * h)).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            self.flow_cache = Some((h.to_bits(), exps));
        }
        Ok(&self.flow_cache.as_ref().expect("just filled").1)
    }

    fn state_map(&self, coeff: f64, h: f64, t1: f64, flow: &RiccatiFlow) -> Result<Matrix> {
        let gains = flow.raw_gains()?;
        let n = self.sys.closed_loop(t1, &gains)?;
        expm(&n.scale(coeff * h))
    }

    fn flow_map(&mut self, i: usize, h: f64, t2: f64) -> Result<Matrix> {
        match self.engine {
            Engine::Autonomous => Ok(self.cached_flow_exps(h)?[i].clone().expect("non-zero b")),
            Engine::NonAutonomous => {
                let k = self.sys.flow_matrix(t2)?;
                expm(&k.scale(self.scheme.b[i] * h))
            }
        }
    }

    fn fsal_hit(&self, kind: MapKind, h: f64, s: &ExtendedState) -> Option<Matrix> {
        let e = self.fsal.as_ref()?;
        if !self.scheme.fsal || e.kind != kind || e.h.to_bits() != h.to_bits() {
            return None;
        }
        let same = match kind {
            MapKind::State => e.t1 == s.t1 && e.v.as_ref() == Some(s.flow.stacked()),
            MapKind::Flow => e.t2 == s.t2,
        };
        same.then(|| e.map.clone())
    }
}

impl<S: RiccatiSystem + ?Sized> StepMap for SplittingStepper<'_, S> {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState> {
        if h == 0.0 {
            return Ok(state.clone());
        }
        let mut s = state.clone();
        let first_kind = if self.scheme.a[0] != 0.0 {
            MapKind::State
        } else {
            MapKind::Flow
        };
        let mut reused = self.fsal_hit(first_kind, h, &s);
        let mut last: Option<FsalEntry> = None;
        let (mut fresh_state, mut fresh_flow) = (0usize, 0usize);
        let m = self.scheme.pairs();
        for i in 0..m {
            let (a, b) = (self.scheme.a[i], self.scheme.b[i]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            if a != 0.0 {
                let e = match reused.take() {
                    Some(e) => e,
                    None => {
                        fresh_state += 1;
                        self.state_map(a, h, s.t1, &s.flow)
                            .map_err(|e| e.at_stage(i))?
                    }
                };
                s.x = e.mul_vec(&s.x)?;
                s.t2 += a * h;
                last = Some(FsalEntry {
                    kind: MapKind::State,
                    h,
                    t1: s.t1,
                    t2: s.t2,
                    v: Some(s.flow.stacked().clone()),
                    map: e,
                });
            }
            if b != 0.0 {
                let e = match reused.take() {
                    Some(e) => e,
                    None => {
                        fresh_flow += 1;
                        self.flow_map(i, h, s.t2).map_err(|e| e.at_stage(i))?
                    }
                };
                let y = &e * s.flow.stacked();
                s.t1 += b * h;
                s.flow = s.with_flow(y, s.t1);
                last = Some(FsalEntry {
                    kind: MapKind::Flow,
                    h,
                    t1: s.t1,
                    t2: s.t2,
                    v: None,
                    map: e,
                });
            }
        }
        // The trailing map was applied at the end state; keep it for reuse if
        // the next step starts where this one ended.
        if let Some(mut e) = last {
            e.t1 = s.t1;
            e.t2 = s.t2;
            if e.kind == MapKind::State {
                e.v = Some(s.flow.stacked().clone());
            }
            self.fsal = Some(e);
        }
        // One stage pairs a state map with a flow map; whichever family is
        // merged across steps sets the count.
        self.evaluations += fresh_state.max(fresh_flow);
        Ok(s)
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn name(&self) -> String {
        self.scheme.name.clone()
    }
}

/// One step of the autonomous engine from a fresh stepper (no cache reuse).
pub fn step_autonomous<S: RiccatiSystem + ?Sized>(
    scheme: &SplittingScheme,
    h: f64,
    state: &ExtendedState,
    sys: &S,
) -> Result<ExtendedState> {
    SplittingStepper::autonomous(sys, scheme.clone())?.step(h, state)
}

/// One step of the two-time-coordinate engine.
pub fn step_nonautonomous<S: RiccatiSystem + ?Sized>(
    scheme: &SplittingScheme,
    h: f64,
    state: &ExtendedState,
    sys: &S,
) -> Result<ExtendedState> {
    SplittingStepper::nonautonomous(sys, scheme.clone()).step(h, state)
}

/// Symmetric second-order map: half state step, Padé flow step at the
/// midpoint of the second time coordinate, half state step.
pub struct S2Step<'a, S: RiccatiSystem + ?Sized> {
    sys: &'a S,
    evaluations: usize,
}

impl<'a, S: RiccatiSystem + ?Sized> S2Step<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        S2Step {
            sys,
            evaluations: 0,
        }
    }
}

impl<S: RiccatiSystem + ?Sized> StepMap for S2Step<'_, S> {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState> {
        if h == 0.0 {
            return Ok(state.clone());
        }
        let mut s = state.clone();
        let n0 = self.sys.closed_loop(s.t1, &s.gains()?)?;
        s.x = expm(&n0.scale(0.5 * h))?.mul_vec(&s.x)?;
        s.t2 += 0.5 * h;
        let k = self.sys.flow_matrix(s.t2)?;
        let phi = pade2(&k, h)?;
        s.t1 += h;
        s.flow = s.with_flow(&phi * s.flow.stacked(), s.t1);
        let n1 = self.sys.closed_loop(s.t1, &s.gains()?)?;
        s.x = expm(&n1.scale(0.5 * h))?.mul_vec(&s.x)?;
        s.t2 += 0.5 * h;
        self.evaluations += 1;
        Ok(s)
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn name(&self) -> String {
        "s2".into()
    }
}

/// Convenience single S² step.
pub fn s2_step<S: RiccatiSystem + ?Sized>(
    h: f64,
    state: &ExtendedState,
    sys: &S,
) -> Result<ExtendedState> {
    S2Step::new(sys).step(h, state)
}

/// `Π_i base_{α_i h}`.
pub struct Composed<M> {
    base: M,
    alphas: Vec<f64>,
}

impl<M: StepMap> Composed<M> {
    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

pub fn compose<M: StepMap>(base: M, alphas: Vec<f64>) -> Result<Composed<M>> {
    let sum: f64 = alphas.iter().sum();
    if alphas.is_empty() || (sum - 1.0).abs() > 1e-14 {
        return Err(Error::Config(alloc::format!(
            "composition weights must sum to one (got {sum})"
        )));
    }
    Ok(Composed { base, alphas })
}

impl<M: StepMap> StepMap for Composed<M> {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState> {
        let mut s = state.clone();
        for (i, &alpha) in self.alphas.iter().enumerate() {
            s = self.base.step(alpha * h, &s).map_err(|e| e.at_stage(i))?;
        }
        Ok(s)
    }

    fn evaluations(&self) -> usize {
        self.base.evaluations()
    }

    fn name(&self) -> String {
        alloc::format!("{}x{}", self.base.name(), self.alphas.len())
    }
}

/// Degree-4 Taylor polynomial of `exp(X)`.
pub(crate) fn taylor4_exp(x: &Matrix) -> Matrix {
    let id = Matrix::identity(x.rows());
    // Horner: I + X(I + X/2(I + X/3(I + X/4)))
    let mut acc = id.clone();
    for k in (1..=4).rev() {
        acc = &id + &(&x.scale(1.0 / k as f64) * &acc);
    }
    acc
}

struct DominantCache {
    h_bits: u64,
    /// Per distinct pair index: `(e^{τA}, e^{-τ/2 A}, e^{-τ A})`.
    per_stage: Vec<Option<(Matrix, Matrix, Matrix)>>,
}

/// Near-integrable engine: the `a` maps solve the dominant part exactly
/// (flow) and by CF4 (state); the `b` maps solve the frozen-time perturbation
/// of the flow with a degree-4 Taylor polynomial.
pub struct NearIntegrableStepper<'a, S: RiccatiSystem + ?Sized> {
    sys: &'a S,
    scheme: SplittingScheme,
    dominant: Matrix,
    cache: Option<DominantCache>,
    started: bool,
    evaluations: usize,
}

impl<'a, S: RiccatiSystem + ?Sized> NearIntegrableStepper<'a, S> {
    /// `dominant` is the constant drift `A` whose flow is solved exactly.
    pub fn new(sys: &'a S, scheme: SplittingScheme, dominant: Option<Matrix>) -> Result<Self> {
        let dominant = dominant.ok_or(Error::Misuse(
            "near-integrable splitting needs a dominant matrix designation",
        ))?;
        let n = sys.state_dim();
        if dominant.shape() != (n, n) {
            return Err(Error::dims("dominant", (n, n), dominant.shape()));
        }
        Ok(NearIntegrableStepper {
            sys,
            scheme,
            dominant,
            cache: None,
            started: false,
            evaluations: 0,
        })
    }

    fn dominant_exps(&mut self, h: f64, i: usize) -> Result<(Matrix, Matrix, Matrix)> {
        if !matches!(&self.cache, Some(c) if c.h_bits == h.to_bits()) {
            self.cache = Some(DominantCache {
                h_bits: h.to_bits(),
                per_stage: vec![None; self.scheme.pairs()],
            });
        }
        let cache = self.cache.as_mut().expect("just filled");
        if cache.per_stage[i].is_none() {
            let tau = self.scheme.a[i] * h;
            let a = &self.dominant;
            cache.per_stage[i] = Some((
                expm(&a.scale(tau))?,
                expm(&a.scale(-0.5 * tau))?,
                expm(&a.scale(-tau))?,
            ));
        }
        Ok(cache.per_stage[i].clone().expect("just filled"))
    }

    /// State propagator over the dominant stage `i` starting at `t` with flow `flow`.
    fn dominant_state_map(
        &mut self,
        i: usize,
        h: f64,
        t: f64,
        flow: &RiccatiFlow,
    ) -> Result<Matrix> {
        let tau = self.scheme.a[i] * h;
        let (_, half, full) = self.dominant_exps(h, i)?;
        let p_star = flow.raw_gains()?;
        let propagate = |e: &Matrix| -> Vec<Matrix> {
            let et = e.transpose();
            p_star.iter().map(|p| &(&et * p) * e).collect()
        };
        let identity = Matrix::identity(self.sys.state_dim());
        let m0 = self.sys.closed_loop(t, &propagate(&identity))?;
        let mh = self.sys.closed_loop(t + 0.5 * tau, &propagate(&half))?;
        let m1 = self.sys.closed_loop(t + tau, &propagate(&full))?;
        let (e1, e2) = magnus::cf4_exponentials(&m0, &mh, &m1, tau)?;
        Ok(&e2 * &e1)
    }

    fn dominant_flow(&mut self, i: usize, h: f64, flow: &RiccatiFlow) -> Result<Matrix> {
        let (forward, _, full) = self.dominant_exps(h, i)?;
        let n = flow.state_dim();
        let backward_t = full.transpose();
        let y = flow.stacked();
        let mut out = Matrix::zeros(y.rows(), n);
        out.set_block(0, 0, &(&forward * &flow.u()));
        for j in 0..flow.players() {
            out.set_block((j + 1) * n, 0, &(&backward_t * &flow.v(j)));
        }
        Ok(out)
    }

    fn perturbation_map(&self, coeff: f64, h: f64, t: f64) -> Result<Matrix> {
        let mut k = self.sys.flow_matrix(t)?;
        let n = self.sys.state_dim();
        let a = &self.dominant;
        let at = a.transpose();
        let k00 = &k.block(0, 0, n, n) - a;
        k.set_block(0, 0, &k00);
        for j in 1..=self.sys.players() {
            let kjj = &k.block(j * n, j * n, n, n) + &at;
            k.set_block(j * n, j * n, &kjj);
        }
        Ok(taylor4_exp(&k.scale(coeff * h)))
    }
}

impl<S: RiccatiSystem + ?Sized> StepMap for NearIntegrableStepper<'_, S> {
    fn step(&mut self, h: f64, state: &ExtendedState) -> Result<ExtendedState> {
        if h == 0.0 {
            return Ok(state.clone());
        }
        let mut s = state.clone();
        // A single time coordinate drives both parts.
        s.t2 = s.t1;
        for i in 0..self.scheme.pairs() {
            let (a, b) = (self.scheme.a[i], self.scheme.b[i]);
            if a != 0.0 {
                let ex = self
                    .dominant_state_map(i, h, s.t1, &s.flow)
                    .map_err(|e| e.at_stage(i))?;
                s.x = ex.mul_vec(&s.x)?;
                let y = self.dominant_flow(i, h, &s.flow)?;
                s.t1 += a * h;
                s.flow = s.with_flow(y, s.t1);
            }
            if b != 0.0 {
                let e = self
                    .perturbation_map(b, h, s.t1)
                    .map_err(|e| e.at_stage(i))?;
                let y = &e * s.flow.stacked();
                s.flow = s.with_flow(y, s.t1);
            }
        }
        s.t2 = s.t1;
        // Consecutive trailing/leading dominant maps merge into one stage of
        // double length; the cost is counted that way even though both halves
        // are evaluated here to expose the state at every step boundary.
        let first_step = !self.started;
        self.started = true;
        self.evaluations += self.scheme.stages + usize::from(first_step && self.scheme.fsal);
        Ok(s)
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn name(&self) -> String {
        self.scheme.name.clone()
    }
}
