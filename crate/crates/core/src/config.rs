//! JSON scenario files.
//!
//! ```json
//! {
//!   "scenario": "sweep",
//!   "weight": {"kind": "gaussian", "params": {}},
//!   "budget": 1.5,
//!   "range": {"a_min": -1.6, "a_max": -0.3},
//!   "resolution": 4000,
//!   "steps": 21,
//!   "out": "sweep.csv"
//! }
//! ```
//!
//! Every key is optional at the parsing stage; each scenario asks for what
//! it needs through the accessors below, which report the missing or bad
//! key by name.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::rearrange::CellSpec;
use crate::sl1d::Problem;
use crate::weights::{RadialWeight, Weight1D, WeightKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_path_to_error::Error<serde_json::Error>),
    #[error("config key `{key}`: {msg}")]
    Key { key: &'static str, msg: String },
}

fn key_err(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key { key, msg: msg.into() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub a_min: f64,
    pub a_max: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Option<String>,
    pub weight: Option<WeightSpec>,
    pub interval: Option<IntervalSpec>,
    pub budget: Option<f64>,
    pub range: Option<RangeSpec>,
    pub resolution: Option<usize>,
    pub steps: Option<usize>,
    pub modes: Option<usize>,
    pub problem: Option<String>,
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub k: Option<usize>,
    pub cells: Option<Vec<CellSpec>>,
    pub partner: Option<Vec<CellSpec>>,
    pub out: Option<PathBuf>,
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        Ok(serde_path_to_error::deserialize(de)?)
    }

    /// Rejects a config written for another scenario.
    pub fn expect_scenario(&self, name: &str) -> Result<(), ConfigError> {
        match &self.scenario {
            Some(s) if s != name => Err(key_err("scenario", format!("expected `{name}`, found `{s}`"))),
            _ => Ok(()),
        }
    }

    fn weight_kind(&self, default: &str) -> Result<(String, Map<String, Value>), ConfigError> {
        Ok(match &self.weight {
            Some(w) => (w.kind.clone(), w.params.clone()),
            None => (default.to_string(), Map::new()),
        })
    }

    /// One-dimensional weight; `default` is used when the key is absent.
    pub fn weight_1d(&self, default: &str) -> Result<Weight1D, ConfigError> {
        let (kind, params) = self.weight_kind(default)?;
        let kind = match kind.as_str() {
            "constant" => {
                let c0 = params
                    .get("c0")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| key_err("weight.params.c0", "constant weight needs a numeric c0"))?;
                WeightKind::Constant { c0 }
            }
            "gaussian" => WeightKind::Gaussian,
            "anti_gaussian" => WeightKind::AntiGaussian,
            other => return Err(key_err("weight.kind", format!("unknown 1D weight `{other}`"))),
        };
        Weight1D::from_kind(kind).map_err(|e| key_err("weight", e.to_string()))
    }

    /// Radial exponent `h` in dimension `dim`.
    pub fn radial_weight(&self, default: &str) -> Result<RadialWeight, ConfigError> {
        let (kind, _) = self.weight_kind(default)?;
        let kind = match kind.as_str() {
            "radial_square" => WeightKind::RadialSquare,
            "radial_zero" => WeightKind::RadialZero,
            other => return Err(key_err("weight.kind", format!("unknown radial weight `{other}`"))),
        };
        RadialWeight::from_kind(kind, self.dim.unwrap_or(2)).map_err(|e| key_err("dim", e.to_string()))
    }

    pub fn resolution(&self, default: usize) -> usize {
        self.resolution.unwrap_or(default)
    }

    pub fn interval(&self) -> Result<IntervalSpec, ConfigError> {
        let iv = self.interval.ok_or_else(|| key_err("interval", "missing"))?;
        if !(iv.a < iv.b) {
            return Err(key_err("interval", format!("need a < b, got ({}, {})", iv.a, iv.b)));
        }
        Ok(iv)
    }

    pub fn budget(&self) -> Result<f64, ConfigError> {
        let d = self.budget.ok_or_else(|| key_err("budget", "missing"))?;
        if !(d > 0.0) {
            return Err(key_err("budget", format!("must be positive, got {d}")));
        }
        Ok(d)
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        match self.problem.as_deref() {
            None | Some("neumann") => Ok(Problem::Neumann),
            Some("dirichlet_inverse_weight") => Ok(Problem::DirichletInverseWeight),
            Some("flat_dirichlet") => Ok(Problem::FlatDirichlet),
            Some(other) => Err(key_err("problem", format!("unknown problem `{other}`"))),
        }
    }

    pub fn cells(&self) -> Result<&[CellSpec], ConfigError> {
        self.cells.as_deref().ok_or_else(|| key_err("cells", "missing"))
    }

    pub fn partner(&self) -> Result<&[CellSpec], ConfigError> {
        self.partner.as_deref().ok_or_else(|| key_err("partner", "missing"))
    }
}
