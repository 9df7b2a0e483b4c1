//! Numerical toolkit for locally conformally Kähler geometry on the
//! coverings `ℂⁿ \ {0}` of linear Hopf manifolds.

pub mod conventions;
pub mod error;
pub mod flows;
pub mod form;
pub mod hopf;
pub mod jet;
pub mod lck;
pub mod potential;
pub mod sampling;

pub use nalgebra;
pub use num_complex;

pub use error::{Error, Result};
pub use flows::{CircleAction, LinearFlow, LinearMap, QuadratureRule, Scheme};
pub use form::{ComplexStructure, KForm, Point, ScalarField, VectorField};
pub use hopf::{make_classical_hopf, make_linear_hopf, HomothetyField, HopfModel};
pub use jet::Jet;
pub use lck::{HermitianMetric, LckStructure, WeightCharacter};
pub use potential::{certify_potential, verify_key_formula, PotentialCertificate, Window};
