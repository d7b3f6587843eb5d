//! Method × resolution sweeps against a high-resolution reference and the
//! work–precision CSV they produce.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use lqsplit_core::magnus::{cf4_exponentials, cf4_step_with};
use lqsplit_core::matfun::expm;
use lqsplit_core::pipeline::{solve_forward, Method, Trajectory};
use lqsplit_core::riccati::{backward, BackwardMethod};
use lqsplit_core::{Matrix, RiccatiFlow, RiccatiSystem};

use crate::error::{Error, Result};

/// A gain is flagged as having lost positivity below this value.
pub const POSITIVITY_THRESHOLD: f64 = -1e-8;

/// Reference runs at `R` and `2R` steps must agree this closely on `x(T)`.
pub const REFERENCE_TOLERANCE: f64 = 1e-11;

pub const CSV_HEADER: &str =
    "method,resolution,evaluations,seconds,x_error,gain_defect,positivity_flag,symmetry_defect";

pub const DEFAULT_STEPS: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];

pub const DEFAULT_TOL_EXPONENTS: [i32; 9] = [4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resolution {
    /// Uniform steps over the horizon.
    Steps(usize),
    /// `AbsTol = 10^-i`, `RelTol = 10^(1-i)`.
    TolExponent(i32),
}

impl Resolution {
    /// Step size `h` or the absolute tolerance.
    pub fn value(&self, span: f64) -> f64 {
        match *self {
            Resolution::Steps(k) => span / k as f64,
            Resolution::TolExponent(i) => 10f64.powi(-i),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub method: String,
    pub resolution: Resolution,
    pub resolution_value: f64,
    pub evaluations: usize,
    pub seconds: f64,
    /// `max_j |x_j(T) - x_ref,j(T)|`.
    pub x_error: f64,
    /// `max_i ‖P_i(T) - Q_iT‖`.
    pub gain_defect: f64,
    /// Terminal gain eigenvalue below [`POSITIVITY_THRESHOLD`].
    pub positivity_flag: bool,
    pub symmetry_defect: f64,
    /// Smallest gain eigenvalue over every sampled time.
    pub min_path_eigenvalue: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<String>,
    pub steps: Vec<usize>,
    pub tol_exponents: Vec<i32>,
    pub timing: bool,
    /// Reference resolution as a multiple of the finest sweep resolution.
    pub reference_factor: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            methods: vec!["sp2".into(), "sp4".into(), "sp6".into(), "rk4".into()],
            steps: DEFAULT_STEPS.to_vec(),
            tol_exponents: DEFAULT_TOL_EXPONENTS.to_vec(),
            timing: false,
            reference_factor: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub steps: usize,
    pub x_final: Vec<f64>,
    /// `max |x_R(T) - x_2R(T)|`.
    pub difference: f64,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub reference: Reference,
    /// CF4 steps spent on the shared backward pass.
    pub backward_steps: usize,
    pub rows: Vec<SweepResult>,
}

/// Parse step sizes such as `1/8` or `0.125` into step counts over `span`.
pub fn parse_h_ladder(items: &[String], span: f64) -> Result<Vec<usize>> {
    items
        .iter()
        .map(|s| {
            let s = s.trim();
            let h = match s.split_once('/') {
                Some((n, d)) => n
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .zip(d.trim().parse::<f64>().ok())
                    .map(|(n, d)| n / d),
                None => s.parse::<f64>().ok(),
            }
            .filter(|h| *h > 0.0 && h.is_finite())
            .ok_or_else(|| Error::Config(format!("bad step size `{s}`")))?;
            let k = (span / h).round();
            if k < 1.0 || ((span / k) - h).abs() > 1e-12 * h {
                return Err(Error::Config(format!(
                    "step size {s} does not divide the horizon {span}"
                )));
            }
            Ok(k as usize)
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

const COARSE_STRIDE: usize = 16;

/// Gains `P_i` on `intervals + 1` uniform nodes of the horizon. Constant
/// coefficients use a fresh exponential per node so that no rounding error
/// is accumulated; otherwise the flow is tabulated with CF4.
fn gain_table<S: RiccatiSystem + ?Sized>(
    sys: &S,
    flow0: &RiccatiFlow,
    intervals: usize,
) -> Result<Vec<Vec<Matrix>>> {
    let t0 = sys.t0();
    let dt = (sys.t_final() - t0) / intervals as f64;
    let y0 = flow0.stacked();
    let mut table = Vec::with_capacity(intervals + 1);
    if sys.is_autonomous() {
        let k = sys.flow_matrix(t0)?;
        for j in 0..=intervals {
            let y = &expm(&k.scale(j as f64 * dt))? * y0;
            table.push(RiccatiFlow::from_stacked(y, t0 + j as f64 * dt)?.raw_gains()?);
        }
    } else {
        // Accumulate only on a coarse grid; each fine node is one CF4 step
        // away from its coarse node.
        let mut coarse = y0.clone();
        for q in 0..intervals.div_ceil(COARSE_STRIDE) {
            let base = q * COARSE_STRIDE;
            let tq = t0 + base as f64 * dt;
            for r in 0..COARSE_STRIDE.min(intervals + 1 - base) {
                let y = if r == 0 {
                    coarse.clone()
                } else {
                    cf4_step_with(|s| sys.flow_matrix(s), tq, r as f64 * dt, &coarse)?
                };
                table.push(RiccatiFlow::from_stacked(y, tq + r as f64 * dt)?.raw_gains()?);
            }
            let span = COARSE_STRIDE.min(intervals - base);
            coarse = cf4_step_with(|s| sys.flow_matrix(s), tq, span as f64 * dt, &coarse)?;
            if base + span == intervals {
                table.push(RiccatiFlow::from_stacked(coarse.clone(), sys.t_final())?.raw_gains()?);
            }
        }
    }
    Ok(table)
}

/// CF4 on the closed-loop state with gains read from `table` every `stride`
/// nodes (one step spans `2 * stride` table intervals).
fn state_by_cf4<S: RiccatiSystem + ?Sized>(
    sys: &S,
    table: &[Vec<Matrix>],
    stride: usize,
) -> Result<Vec<f64>> {
    let intervals = table.len() - 1;
    let t0 = sys.t0();
    let dt = (sys.t_final() - t0) / intervals as f64;
    let mut x = sys.x0().to_vec();
    let mut j = 0;
    while j < intervals {
        let node = |i: usize| sys.closed_loop(t0 + i as f64 * dt, &table[i]);
        let (e1, e2) = cf4_exponentials(
            &node(j)?,
            &node(j + stride)?,
            &node(j + 2 * stride)?,
            2.0 * stride as f64 * dt,
        )?;
        x = e2.mul_vec(&e1.mul_vec(&x)?)?;
        j += 2 * stride;
    }
    Ok(x)
}

/// `x(T)` from CF4 on the closed-loop state at `factor × finest` steps and at
/// twice that, which must agree to [`REFERENCE_TOLERANCE`]. The gains come
/// from the linearized flow, independently of the methods under test.
pub fn reference_solution<S: RiccatiSystem + ?Sized>(
    sys: &S,
    flow0: &RiccatiFlow,
    finest: usize,
    factor: usize,
) -> Result<Reference> {
    let steps = finest.max(1) * factor.max(100);
    let table = gain_table(sys, flow0, 4 * steps)?;
    let x1 = state_by_cf4(sys, &table, 2)?;
    let x2 = state_by_cf4(sys, &table, 1)?;
    let difference = max_abs_diff(&x1, &x2);
    if difference > REFERENCE_TOLERANCE || difference.is_nan() {
        return Err(Error::Reference {
            steps,
            double: 2 * steps,
            difference,
        });
    }
    Ok(Reference {
        steps,
        x_final: x2,
        difference,
    })
}

fn resolve_method<S: RiccatiSystem + ?Sized>(sys: &S, name: &str) -> lqsplit_core::Result<Method> {
    // The near-integrable split needs the drift to be constant.
    let dominant = if sys.is_autonomous() {
        Some(sys.drift(sys.t0())?)
    } else {
        None
    };
    Method::from_name(name, dominant)
}

fn measure<S: RiccatiSystem + ?Sized>(
    sys: &S,
    flow0: &RiccatiFlow,
    reference: &Reference,
    name: &str,
    resolution: Resolution,
    timing: bool,
) -> SweepResult {
    let span = sys.t_final() - sys.t0();
    let mut row = SweepResult {
        method: name.into(),
        resolution,
        resolution_value: resolution.value(span),
        evaluations: 0,
        seconds: 0.0,
        x_error: f64::NAN,
        gain_defect: f64::NAN,
        positivity_flag: false,
        symmetry_defect: f64::NAN,
        min_path_eigenvalue: f64::NAN,
        failure: None,
    };
    let run = || -> lqsplit_core::Result<Trajectory> {
        match resolution {
            Resolution::Steps(k) => solve_forward(sys, flow0, &resolve_method(sys, name)?, k),
            Resolution::TolExponent(i) => solve_forward(sys, flow0, &Method::dopri(i), 1),
        }
    };
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(tr) => {
            row.evaluations = tr.evaluations;
            row.seconds = if timing { elapsed } else { 0.0 };
            row.x_error = max_abs_diff(tr.final_state(), &reference.x_final);
            row.gain_defect = tr.terminal_gain_defect(&sys.terminal_gains());
            row.positivity_flag = tr.min_terminal_eigenvalue() < POSITIVITY_THRESHOLD;
            row.symmetry_defect = tr.max_symmetry_defect();
            row.min_path_eigenvalue = tr.min_path_eigenvalue();
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    row
}

/// Shared backward pass and reference endpoint of a sweep.
#[derive(Clone, Debug)]
pub struct Baseline {
    pub flow: RiccatiFlow,
    /// CF4 steps spent on the backward pass.
    pub backward_steps: usize,
    pub reference: Reference,
}

/// Backward pass to the default accuracy and a reference endpoint at
/// `factor × finest` steps.
pub fn prepare<S: RiccatiSystem + ?Sized>(
    sys: &S,
    finest: usize,
    factor: usize,
) -> Result<Baseline> {
    let pass = backward(sys, BackwardMethod::default_for(sys))?;
    let reference = reference_solution(sys, &pass.flow, finest, factor)?;
    Ok(Baseline {
        flow: pass.flow,
        backward_steps: pass.magnus_steps,
        reference,
    })
}

/// One row per method and resolution; `dopri` runs over the tolerance
/// ladder, every other method over the step ladder. Failures are recorded in
/// the row.
pub fn sweep_rows<S: RiccatiSystem + ?Sized>(
    sys: &S,
    base: &Baseline,
    config: &SweepConfig,
) -> Vec<SweepResult> {
    let mut rows = Vec::new();
    for name in &config.methods {
        let resolutions: Vec<Resolution> = if name == "dopri" {
            config
                .tol_exponents
                .iter()
                .map(|&i| Resolution::TolExponent(i))
                .collect()
        } else {
            config.steps.iter().map(|&k| Resolution::Steps(k)).collect()
        };
        for r in resolutions {
            rows.push(measure(
                sys,
                &base.flow,
                &base.reference,
                name,
                r,
                config.timing,
            ));
        }
    }
    rows
}

pub fn run_sweep<S: RiccatiSystem + ?Sized>(sys: &S, config: &SweepConfig) -> Result<Sweep> {
    if config.methods.is_empty() {
        return Err(Error::Config("no methods to sweep".into()));
    }
    let finest = config
        .steps
        .iter()
        .copied()
        .max()
        .unwrap_or(DEFAULT_STEPS[DEFAULT_STEPS.len() - 1]);
    let base = prepare(sys, finest, config.reference_factor)?;
    let rows = sweep_rows(sys, &base, config);
    Ok(Sweep {
        reference: base.reference,
        backward_steps: base.backward_steps,
        rows,
    })
}

/// `{:.16e}`: 17 significant digits, round-trippable.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(results: &[SweepResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            num(r.resolution_value),
            r.evaluations,
            num(r.seconds),
            num(r.x_error),
            num(r.gain_defect),
            r.positivity_flag,
            num(r.symmetry_defect)
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_csv(results: &[SweepResult], path: &Path) -> Result<()> {
    let text = render_csv(results)?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
