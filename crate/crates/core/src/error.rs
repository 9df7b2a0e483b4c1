use thiserror::Error;

use crate::form::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid degree {degree} for {op}: {reason}")]
    Degree {
        op: &'static str,
        degree: usize,
        reason: &'static str,
    },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("linear map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("jet depth {requested} exceeds supported maximum {max}")]
    Capability { requested: usize, max: usize },

    #[error("not LCK: {what} residual {residual:e} exceeds {tolerance:e} at {point}")]
    NotLck {
        what: &'static str,
        residual: f64,
        tolerance: f64,
        point: Point,
    },

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("geometry error at {point}: {reason}")]
    Geometry { point: Point, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not a contraction: eigenvalue moduli {moduli:?} must all be < 1")]
    Contraction { moduli: Vec<f64> },

    #[error("integrand is not periodic: endpoint residual {residual:e}")]
    Periodicity { residual: f64 },

    #[error("1-form is not closed: |dθ| = {residual:e} exceeds {tolerance:e}")]
    NotClosed { residual: f64, tolerance: f64 },

    #[error("difference of Lee forms is not exact: path mismatch {residual:e}")]
    Exactness { residual: f64 },

    #[error("field is not Killing: |Lie ω| = {residual:e}")]
    NotKilling { residual: f64 },

    #[error("field is not a homothety: residual {residual:e}")]
    NotHomothety { residual: f64 },

    #[error("logarithm branch: {0}")]
    Branch(String),
}
