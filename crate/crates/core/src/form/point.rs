use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of `ℂⁿ ≅ ℝ²ⁿ` in coordinates `(x₁, y₁, …, xₙ, yₙ)`, `z_j = x_j + i y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidPoint(format!(
                "expected 2n > 0 real coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        Ok(Self { coords })
    }

    pub fn from_complex(z: &[Complex64]) -> Result<Self> {
        Self::new(z.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    /// Rejects the origin, which is excluded from `ℂⁿ \ {0}`.
    pub fn punctured(coords: Vec<f64>) -> Result<Self> {
        let p = Self::new(coords)?;
        if p.norm_sq() == 0.0 {
            return Err(Error::InvalidPoint("origin is excluded".into()));
        }
        Ok(p)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn z(&self, j: usize) -> Complex64 {
        Complex64::new(self.coords[2 * j], self.coords[2 * j + 1])
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}
