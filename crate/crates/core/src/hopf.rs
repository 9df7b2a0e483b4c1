//! Linear Hopf manifolds `(ℂⁿ \ {0}) / ⟨A⟩` and their standard catalog.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flows::{complex_structure_matrix, pullback, CircleAction, LinearFlow, LinearMap};
use crate::form::{lie_derivative, Basis, KForm, Point, ScalarField, VectorField};
use crate::jet::Jet;
use crate::lck::{sup_diff, LckStructure, WeightCharacter};
use crate::sampling::{sample_points, worst_over};

/// Tolerance for the structural checks run while building models.
pub const MODEL_TOL: f64 = 1e-10;

const CHECK_SAMPLES: usize = 16;
const CHECK_SEED: u64 = 0x5eed;

fn check_points(n: usize) -> Vec<Point> {
    sample_points(n, CHECK_SAMPLES, CHECK_SEED)
}

/// `ω̃ = −Σ dx_j ∧ dy_j`.
pub fn flat_kahler_form(n: usize) -> KForm {
    let b = Basis::get(2 * n, 2);
    let mut c = vec![0.0; b.len()];
    for j in 0..n {
        c[b.index_of(&[2 * j, 2 * j + 1]).expect("basis")] = -1.0;
    }
    KForm::constant(n, 2, c)
}

/// `|z|²`.
pub fn norm_squared(n: usize) -> ScalarField {
    ScalarField::from_fn(n, |x| {
        let mut acc = Jet::zero(x[0].vars(), x[0].order());
        for xi in x {
            acc += &(xi * xi);
        }
        acc
    })
}

/// `θ = −d log|z|² = −2 Σ (x_j dx_j + y_j dy_j) / |z|²`, in closed form.
pub fn hopf_lee_form(n: usize) -> KForm {
    KForm::from_fn(n, 1, |x| {
        let mut r2 = Jet::zero(x[0].vars(), x[0].order());
        for xi in x {
            r2 += &(xi * xi);
        }
        let inv = r2.recip();
        x.iter().map(|xi| (xi * &inv).scale(-2.0)).collect()
    })
}

/// `ω = ω̃ / |z|²`.
pub fn hopf_lck_form(n: usize) -> KForm {
    flat_kahler_form(n)
        .mul_scalar(&norm_squared(n).map(Jet::recip))
        .expect("same dimension")
}

/// The classical Hopf LCK structure, validated on a fixed internal sample.
pub fn hopf_lck_structure(n: usize) -> Result<LckStructure> {
    LckStructure::new(hopf_lck_form(n), hopf_lee_form(n), &check_points(n), 1e-8)
}

/// Block-diagonal rotation `diag(a_j · [[0, −1], [1, 0]])`.
pub fn killing_rates(rates: &[f64]) -> LinearMap {
    let n = rates.len();
    let c = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        rates.iter().map(|&a| Complex64::new(0.0, a)),
    ));
    LinearMap::from_complex(&c).expect("square")
}

/// Standard metric data, present when the contraction is a similarity.
#[derive(Clone, Debug)]
pub struct FlatCatalog {
    pub kahler: KForm,
    pub potential: ScalarField,
    pub lck: LckStructure,
    pub radial: VectorField,
    pub rotation: VectorField,
}

impl FlatCatalog {
    fn new(n: usize) -> Result<Self> {
        Ok(Self {
            kahler: flat_kahler_form(n),
            potential: norm_squared(n),
            lck: hopf_lck_structure(n)?,
            radial: VectorField::from_matrix(LinearMap::identity(n).rows()),
            rotation: VectorField::from_matrix(LinearMap::from_matrix(complex_structure_matrix(n))?.rows()),
        })
    }
}

#[derive(Clone, Debug)]
pub struct HopfModel {
    n: usize,
    contraction: LinearMap,
    eigenvalues: Vec<Complex64>,
    character: Option<WeightCharacter>,
    catalog: Option<FlatCatalog>,
}

/// Similarity `α · Id` on `ℂⁿ`, `0 < |α| < 1`.
pub fn make_classical_hopf(n: usize, alpha: Complex64) -> Result<HopfModel> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "LCK Hopf models need complex dimension n >= 2, got {n}"
        )));
    }
    make_linear_hopf(n, LinearMap::complex_scalar(n, alpha))
}

/// Hopf model of an arbitrary complex-linear contraction. The flat catalog
/// and the deck character are present only for similarities.
pub fn make_linear_hopf(n: usize, a: LinearMap) -> Result<HopfModel> {
    if n == 0 || a.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: a.n() });
    }
    if !a.is_complex_linear(1e-12) {
        return Err(Error::Precondition(format!(
            "contraction must be complex-linear (|AJ - JA| = {:e})",
            a.complex_linearity_residual()
        )));
    }
    let det = a.det();
    if det.abs() < 1e-300 {
        return Err(Error::SingularMap { det });
    }
    let eigenvalues = a
        .complex_eigenvalues()
        .ok_or_else(|| Error::Precondition("eigenvalue computation failed".into()))?;
    let moduli: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|&m| !(m < 1.0) || m == 0.0) {
        return Err(Error::Contraction { moduli });
    }
    let c = a.to_complex().expect("complex-linear");
    let alpha = c[(0, 0)];
    let similarity = (&c - DMatrix::from_diagonal_element(n, n, alpha)).camax() <= 1e-14 * (1.0 + alpha.norm());
    let (character, catalog) = if similarity && n >= 2 {
        let catalog = FlatCatalog::new(n)?;
        let chi = measured_character(&a, &catalog.kahler)?;
        let expected = alpha.norm_sqr();
        if (chi - expected).abs() > MODEL_TOL * expected.max(1.0) {
            return Err(Error::Precondition(format!(
                "pullback scale {chi} of the flat form differs from |alpha|^2 = {expected}"
            )));
        }
        (Some(WeightCharacter::new(chi)?), Some(catalog))
    } else {
        (None, None)
    };
    Ok(HopfModel {
        n,
        contraction: a,
        eigenvalues,
        character,
        catalog,
    })
}

/// Pullback scale `A^*ω̃ = χ ω̃` read off at one point; errors if not a multiple.
fn measured_character(a: &LinearMap, kahler: &KForm) -> Result<f64> {
    let p = &check_points(a.n())[0];
    let pulled = pullback(a, kahler)?.coefficients(p);
    let base = kahler.coefficients(p);
    let (k, _) = base
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .expect("nonempty");
    let chi = pulled[k] / base[k];
    let residual = sup_diff(&pulled, &base.iter().map(|b| chi * b).collect::<Vec<_>>());
    if residual > MODEL_TOL {
        return Err(Error::NotHomothety { residual });
    }
    Ok(chi)
}

impl HopfModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contraction(&self) -> &LinearMap {
        &self.contraction
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn character(&self) -> Option<WeightCharacter> {
        self.character
    }

    pub fn catalog(&self) -> Option<&FlatCatalog> {
        self.catalog.as_ref()
    }

    pub fn is_similarity(&self) -> bool {
        self.catalog.is_some()
    }

    fn require_catalog(&self) -> Result<&FlatCatalog> {
        self.catalog
            .as_ref()
            .ok_or_else(|| Error::Precondition("model has no flat Kahler catalog (not a similarity)".into()))
    }

    /// `A = (λ/2)·Euler + K`, with `K` verified Killing and `A` verified
    /// homothetic for `ω̃`.
    pub fn homothety_field(&self, lambda: f64, killing_part: Option<&LinearMap>) -> Result<HomothetyField> {
        let catalog = self.require_catalog()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
        }
        let mut m = LinearMap::identity(self.n).scale(lambda / 2.0);
        if let Some(k) = killing_part {
            if k.n() != self.n {
                return Err(Error::DimensionMismatch { left: self.n, right: k.n() });
            }
            if !k.is_complex_linear(1e-12) {
                return Err(Error::Precondition("Killing part must be complex-linear".into()));
            }
            let lie = lie_derivative(&VectorField::from_matrix(k.rows()), &catalog.kahler)?;
            let (residual, _) = worst_over(&check_points(self.n), |p| lie.sup_norm_at(p));
            if residual > MODEL_TOL {
                return Err(Error::NotKilling { residual });
            }
            m = LinearMap::from_matrix(m.matrix() + k.matrix())?;
        }
        HomothetyField::new(m, lambda, &catalog.kahler)
    }

    /// Circle action with time-1 map equal to the deck transformation,
    /// generated by `log A`. Requires `A` diagonal with positive real
    /// eigenvalues.
    pub fn deck_circle_action(&self) -> Result<CircleAction> {
        let c = self.contraction.to_complex().expect("complex-linear");
        let n = self.n;
        let mut logs = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && c[(i, j)].norm() > 1e-14 {
                    return Err(Error::Branch("log A is only supported for diagonal A".into()));
                }
            }
            let z = c[(i, i)];
            if z.im.abs() > 1e-14 * z.norm() || z.re <= 0.0 {
                return Err(Error::Branch(format!(
                    "eigenvalue {z} is not a positive real; complex-eigenvalue deck maps are unsupported"
                )));
            }
            logs.push(Complex64::new(z.re.ln(), 0.0));
        }
        let g = LinearMap::from_complex(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(logs)))?;
        CircleAction::new(LinearFlow::new(g), 1.0, Some(self.contraction.clone()))
    }

    /// `z ↦ e^{it} z`, period `2π`.
    pub fn rotation_action(&self) -> CircleAction {
        CircleAction::rotation(self.n)
    }
}

/// A linear holomorphic field with `Lie_A ω̃ = λ ω̃`, and its companion `A^c = I A`.
#[derive(Clone, Debug)]
pub struct HomothetyField {
    matrix: LinearMap,
    lambda: f64,
    field: VectorField,
    companion_matrix: LinearMap,
    companion: VectorField,
    residual: f64,
}

impl HomothetyField {
    /// Verifies `Lie_A ω = λ ω` on the internal sample.
    pub fn new(matrix: LinearMap, lambda: f64, omega: &KForm) -> Result<Self> {
        let n = matrix.n();
        let field = VectorField::from_matrix(matrix.rows());
        let companion_matrix = LinearMap::from_matrix(complex_structure_matrix(n) * matrix.matrix())?;
        let companion = VectorField::from_matrix(companion_matrix.rows());
        let lhs = lie_derivative(&field, omega)?;
        let rhs = omega.scale(lambda);
        let (residual, _) = worst_over(&check_points(n), |p| sup_diff(&lhs.coefficients(p), &rhs.coefficients(p)));
        if residual > MODEL_TOL * lambda.max(1.0) {
            return Err(Error::NotHomothety { residual });
        }
        Ok(Self {
            matrix,
            lambda,
            field,
            companion_matrix,
            companion,
            residual,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &LinearMap {
        &self.matrix
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn companion_matrix(&self) -> &LinearMap {
        &self.companion_matrix
    }

    pub fn companion(&self) -> &VectorField {
        &self.companion
    }

    /// Residual of `Lie_A ω − λω` observed at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn flow(&self) -> LinearFlow {
        LinearFlow::new(self.matrix.clone())
    }

    pub fn companion_flow(&self) -> LinearFlow {
        LinearFlow::new(self.companion_matrix.clone())
    }

    /// `cA`, homothetic with constant `cλ`.
    pub fn scaled(&self, c: f64, omega: &KForm) -> Result<HomothetyField> {
        HomothetyField::new(self.matrix.scale(c), c * self.lambda, omega)
    }
}
