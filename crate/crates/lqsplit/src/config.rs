//! TOML problem files.
//!
//! ```toml
//! kind = "pollution"
//! preset = "fig3a"          # optional starting point
//! c = [5.5, 6.0]
//! d = [0.18181818181818182, 0.16666666666666666]
//! rho = 0.1
//! a = { kind = "tanh-ramp", base = 2.0, amplitude = 1.0, rate = 5.0, center = 0.5 }
//! b = 1.0
//! ```
//!
//! or a constant-coefficient LQ problem:
//!
//! ```toml
//! kind = "lq"
//! a = [[0.0, 1.0], [-1.0, 0.0]]
//! b = [[0.0], [1.0]]
//! q = [[1.0, 0.0], [0.0, 1.0]]
//! r = [[1.0]]
//! q_terminal = [[0.0, 0.0], [0.0, 0.0]]
//! x0 = [1.0, 0.0]
//! t_final = 2.0
//! ```

use std::path::Path;

use lqsplit_core::{
    build_pollution, GameProblem, LQProblem, Matrix, PollutionConfig, TimeFunction,
};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemFile {
    Pollution(PollutionSpec),
    Lq(LqSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PollutionSpec {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub a: Option<FunctionSpec>,
    pub b: Option<FunctionSpec>,
    pub c: Option<Vec<f64>>,
    pub d: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub t_final: Option<f64>,
    pub x0: Option<f64>,
}

/// A bare number is a constant.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Value(f64),
    Tagged(TaggedFunction),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaggedFunction {
    Constant {
        value: f64,
    },
    TanhRamp {
        base: f64,
        amplitude: f64,
        rate: f64,
        center: f64,
    },
}

impl From<FunctionSpec> for TimeFunction {
    fn from(f: FunctionSpec) -> Self {
        match f {
            FunctionSpec::Value(v)
            | FunctionSpec::Tagged(TaggedFunction::Constant { value: v }) => {
                TimeFunction::Constant(v)
            }
            FunctionSpec::Tagged(TaggedFunction::TanhRamp {
                base,
                amplitude,
                rate,
                center,
            }) => TimeFunction::TanhRamp {
                base,
                amplitude,
                rate,
                center,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub q_terminal: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
}

/// A problem ready for the solver.
#[allow(clippy::large_enum_variant)]
pub enum Problem {
    Game(GameProblem),
    Lq(LQProblem),
}

impl PollutionSpec {
    pub fn to_config(&self) -> Result<PollutionConfig> {
        let mut cfg = match &self.preset {
            Some(p) => PollutionConfig::preset(p)
                .ok_or_else(|| Error::Config(format!("unknown preset `{p}`")))?,
            None => PollutionConfig {
                name: "custom".into(),
                a: TimeFunction::Constant(1.0),
                b: TimeFunction::Constant(1.0),
                c: Vec::new(),
                d: Vec::new(),
                rho: 0.0,
                t_final: 1.0,
                x0: 10.0,
            },
        };
        if let Some(n) = &self.name {
            cfg.name = n.clone();
        }
        if let Some(a) = self.a {
            cfg.a = a.into();
        }
        if let Some(b) = self.b {
            cfg.b = b.into();
        }
        if let Some(c) = &self.c {
            cfg.c = c.clone();
        }
        if let Some(d) = &self.d {
            cfg.d = d.clone();
        }
        if let Some(rho) = self.rho {
            cfg.rho = rho;
        }
        if let Some(t) = self.t_final {
            cfg.t_final = t;
        }
        if let Some(x0) = self.x0 {
            cfg.x0 = x0;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!(
            "`{name}` must be a non-empty rectangular array of rows"
        )));
    }
    let data = rows.iter().flatten().copied().collect();
    Ok(Matrix::new(rows.len(), cols, data)?)
}

impl LqSpec {
    pub fn to_problem(&self) -> Result<LQProblem> {
        Ok(LQProblem::constant(
            matrix("a", &self.a)?,
            matrix("b", &self.b)?,
            matrix("q", &self.q)?,
            matrix("r", &self.r)?,
            matrix("q_terminal", &self.q_terminal)?,
            self.x0.clone(),
            self.t0,
            self.t_final,
        )?)
    }
}

impl ProblemFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn build(&self) -> Result<Problem> {
        match self {
            ProblemFile::Pollution(p) => Ok(Problem::Game(build_pollution(&p.to_config()?)?)),
            ProblemFile::Lq(l) => Ok(Problem::Lq(l.to_problem()?)),
        }
    }
}
