//! Problem files for `viproplab solve`.
//!
//! ```json
//! {
//!   "n": 32,
//!   "load": 1,
//!   "set": { "kind": "ball", "radius": 1 },
//!   "eps": 1e-8,
//!   "max_iter": 100000
//! }
//! ```
//!
//! `forcing` (a scalar or one entry per node) and `load` (a constant load
//! `c`, discretised as `f_j = c/(n+1)`) are mutually exclusive; both absent
//! means unforced. Box bounds are scalars or vectors; a ball center defaults
//! to the origin. Any scalar may be a JSON number or a `"p/q"` string.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use viproplab_core::exact::to_f64;
use viproplab_core::visolve::{DEFAULT_EPS, DEFAULT_MAX_ITER};
use viproplab_core::{parse_rational, DiscreteVI, FeasibleSet};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn value(&self) -> CliResult<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Text(s) => Ok(to_f64(&parse_rational(s)?)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    One(Scalar),
    Many(Vec<Scalar>),
}

impl ScalarOrVec {
    fn expand(&self, n: usize, what: &str) -> CliResult<Vec<f64>> {
        match self {
            ScalarOrVec::One(s) => Ok(vec![s.value()?; n]),
            ScalarOrVec::Many(v) if v.len() == n => v.iter().map(Scalar::value).collect(),
            ScalarOrVec::Many(v) => Err(CliError::Usage(format!(
                "{what} has {} entries for n = {n}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Box {
        lower: ScalarOrVec,
        upper: ScalarOrVec,
    },
    Ball {
        radius: Scalar,
        center: Option<Vec<Scalar>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub forcing: Option<ScalarOrVec>,
    pub load: Option<Scalar>,
    pub set: SetSpec,
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
}

impl ProblemFile {
    pub fn build(&self) -> CliResult<DiscreteVI> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let forcing = match (&self.forcing, &self.load) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either forcing or load, not both".into()))
            }
            (Some(f), None) => Some(f.expand(n, "forcing")?),
            (None, Some(c)) => Some(vec![c.value()? / (n as f64 + 1.0); n]),
            (None, None) => None,
        };
        let set = match &self.set {
            SetSpec::Box { lower, upper } => FeasibleSet::Box {
                lower: lower.expand(n, "lower bound")?,
                upper: upper.expand(n, "upper bound")?,
            },
            SetSpec::Ball { radius, center } => FeasibleSet::Ball {
                radius: radius.value()?,
                center: match center {
                    Some(c) if c.len() != n => {
                        return Err(CliError::Usage(format!(
                            "ball center has {} entries for n = {n}",
                            c.len()
                        )))
                    }
                    Some(c) => c.iter().map(Scalar::value).collect::<CliResult<_>>()?,
                    None => vec![0.0; n],
                },
            },
        };
        let vi = DiscreteVI::new(n, forcing, set)?;
        Ok(vi.with_tolerances(
            self.eps.unwrap_or(DEFAULT_EPS),
            self.max_iter.unwrap_or(DEFAULT_MAX_ITER),
        )?)
    }
}

pub fn parse(text: &str) -> CliResult<DiscreteVI> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|source| CliError::Json {
        context: "problem file".into(),
        source,
    })?;
    file.build()
}

pub fn load(path: &Path) -> CliResult<DiscreteVI> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| match e {
        CliError::Json { source, .. } => CliError::Json {
            context: path.display().to_string(),
            source,
        },
        other => other,
    })
}
