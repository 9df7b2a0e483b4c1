//! Differential forms on open subsets of `ℂⁿ ≅ ℝ²ⁿ`.

pub(crate) mod basis;
mod fields;
mod ops;
mod point;

pub use basis::{binomial, Basis, InducedMap};
pub use fields::{ComplexStructure, KForm, ScalarField, VectorField, MAX_DEPTH};
pub(crate) use fields::check_depth;
pub(crate) use ops::{d_jets, induced_jets};
pub use ops::{apply_i, d_c, ddc, exterior_d, interior_product, lie_derivative, pointwise_transform, wedge};
pub use point::Point;
