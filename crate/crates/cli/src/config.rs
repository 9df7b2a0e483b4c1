//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! samples = 200
//! suites = ["key-formula", "certify"]   # omitted: all suites
//!
//! [model]
//! kind = "classical"      # or "linear"
//! n = 2
//! alpha = [0.5, 0.0]      # re, im
//! # matrix = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.4, 0.0]]]   # linear only
//!
//! [field]
//! lambda = 2.0
//! killing_rates = [0.5, 0.2]
//!
//! [quadrature]
//! n = 256
//!
//! [tolerances]
//! jet = 1e-8
//! quad = 1e-6
//!
//! [monodromy]
//! actions = ["deck", "rotation"]
//!
//! [pipeline]
//! epsilon = 0.1
//! quadrature_n = 32
//! samples = 6
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lckit::flows::MIN_NODES;
use lckit::hopf::{make_classical_hopf, make_linear_hopf, HopfModel};
use lckit::num_complex::Complex64;
use lckit::LinearMap;

use crate::suites::Suite;

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid { field: &'static str, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid { field, reason } => write!(f, "invalid config field `{field}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Classical,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    pub alpha: [f64; 2],
    /// Complex entries as `[re, im]`, row-major.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            kind: ModelKind::Classical,
            n: 2,
            alpha: [0.5, 0.0],
            matrix: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub lambda: f64,
    /// Empty: the Euler field alone, whose companion is a rotation.
    pub killing_rates: Vec<f64>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            killing_rates: vec![0.5, 0.2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub n: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub jet: f64,
    pub quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { jet: 1e-8, quad: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Deck,
    Rotation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonodromySpec {
    pub actions: Vec<ActionKind>,
}

impl Default for MonodromySpec {
    fn default() -> Self {
        Self {
            actions: vec![ActionKind::Deck, ActionKind::Rotation],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSpec {
    /// Size of the non-invariant conformal factor `e^{ε x₁/|z|}`.
    pub epsilon: f64,
    pub quadrature_n: usize,
    pub samples: usize,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            quadrature_n: 32,
            samples: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    pub model: ModelSpec,
    pub field: FieldSpec,
    pub quadrature: QuadratureSpec,
    pub tolerances: Tolerances,
    pub monodromy: MonodromySpec,
    pub pipeline: PipelineSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            samples: 200,
            suites: None,
            model: ModelSpec::default(),
            field: FieldSpec::default(),
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
            monodromy: MonodromySpec::default(),
            pipeline: PipelineSpec::default(),
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (name, v) in [("tolerances.jet", t.jet), ("tolerances.quad", t.quad)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.quadrature.n < MIN_NODES {
            return Err(invalid("quadrature.n", format!("must be >= {MIN_NODES}, got {}", self.quadrature.n)));
        }
        if self.pipeline.quadrature_n < MIN_NODES {
            return Err(invalid(
                "pipeline.quadrature_n",
                format!("must be >= {MIN_NODES}, got {}", self.pipeline.quadrature_n),
            ));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.pipeline.samples == 0 {
            return Err(invalid("pipeline.samples", "must be at least 1"));
        }
        if self.model.n < 2 {
            return Err(invalid("model.n", format!("need n >= 2, got {}", self.model.n)));
        }
        if !(self.field.lambda > 0.0 && self.field.lambda.is_finite()) {
            return Err(invalid("field.lambda", format!("must be positive, got {}", self.field.lambda)));
        }
        if !self.field.killing_rates.is_empty() && self.field.killing_rates.len() != self.model.n {
            return Err(invalid(
                "field.killing_rates",
                format!("expected {} rates, got {}", self.model.n, self.field.killing_rates.len()),
            ));
        }
        match (self.model.kind, &self.model.matrix) {
            (ModelKind::Linear, None) => return Err(invalid("model.matrix", "required for kind = \"linear\"")),
            (ModelKind::Classical, Some(_)) => return Err(invalid("model.matrix", "only allowed for kind = \"linear\"")),
            (ModelKind::Linear, Some(m))
                if (m.len() != self.model.n || m.iter().any(|r| r.len() != self.model.n)) => {
                    return Err(invalid("model.matrix", format!("expected {0}x{0} entries", self.model.n)));
                }
            _ => {}
        }
        if let Some(list) = &self.suites {
            for name in list {
                if Suite::from_name(name).is_none() {
                    return Err(invalid("suites", format!("unknown suite `{name}`")));
                }
            }
        }
        Ok(())
    }

    /// Selected suites in canonical order, duplicates removed.
    pub fn selected_suites(&self) -> Vec<Suite> {
        match &self.suites {
            None => Suite::ALL.to_vec(),
            Some(list) => Suite::ALL
                .iter()
                .copied()
                .filter(|s| list.iter().any(|n| n == s.name()))
                .collect(),
        }
    }

    pub fn build_model(&self) -> lckit::Result<HopfModel> {
        let m = &self.model;
        match m.kind {
            ModelKind::Classical => make_classical_hopf(m.n, Complex64::new(m.alpha[0], m.alpha[1])),
            ModelKind::Linear => {
                let entries = m.matrix.as_ref().expect("validated");
                let c = lckit::nalgebra::DMatrix::from_fn(m.n, m.n, |i, j| Complex64::new(entries[i][j][0], entries[i][j][1]));
                make_linear_hopf(m.n, LinearMap::from_complex(&c)?)
            }
        }
    }
}
