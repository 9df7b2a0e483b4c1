use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::form::basis::{det, Basis};
use crate::form::Point;
use crate::jet::Jet;

/// Deepest derivative chain a field may request beyond the caller's order.
pub const MAX_DEPTH: usize = 6;

pub(crate) type EvalFn = dyn Fn(&[f64], usize) -> Vec<Jet> + Send + Sync;

pub(crate) fn check_depth(depth: usize) -> Result<usize> {
    if depth > MAX_DEPTH {
        Err(Error::Capability {
            requested: depth,
            max: MAX_DEPTH,
        })
    } else {
        Ok(depth)
    }
}

/// A smooth degree-`k` form on an open subset of `ℝ²ⁿ`.
///
/// Coefficients are produced on demand as jets of any requested order, so
/// derived forms (`dα`, `ι_X α`, Lie derivatives, pullbacks) stay exact.
/// `depth` counts how many extra jet orders the evaluation pulls from the
/// underlying base fields.
#[derive(Clone)]
pub struct KForm {
    n: usize,
    degree: usize,
    depth: usize,
    eval: Option<Arc<EvalFn>>,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KForm")
            .field("n", &self.n)
            .field("degree", &self.degree)
            .field("depth", &self.depth)
            .field("zero", &self.eval.is_none())
            .finish()
    }
}

impl KForm {
    pub(crate) fn raw(
        n: usize,
        degree: usize,
        depth: usize,
        eval: impl Fn(&[f64], usize) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        assert!(degree <= 2 * n, "degree exceeds 2n");
        Self {
            n,
            degree,
            depth,
            eval: Some(Arc::new(eval)),
        }
    }

    /// Build a form from a closure of the coordinate jets; the closure must
    /// return `C(2n, degree)` coefficients in lexicographic multi-index order.
    pub fn from_fn(
        n: usize,
        degree: usize,
        f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        let len = Basis::get(2 * n, degree).len();
        Self::raw(n, degree, 0, move |p, order| {
            let xs = Jet::coordinates(p, order);
            let out = f(&xs);
            assert_eq!(out.len(), len, "form closure returned wrong coefficient count");
            out
        })
    }

    pub fn zero(n: usize, degree: usize) -> Self {
        assert!(degree <= 2 * n, "degree exceeds 2n");
        Self {
            n,
            degree,
            depth: 0,
            eval: None,
        }
    }

    pub fn constant(n: usize, degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), Basis::get(2 * n, degree).len());
        if coeffs.iter().all(|&c| c == 0.0) {
            return Self::zero(n, degree);
        }
        let dim = 2 * n;
        Self::raw(n, degree, 0, move |_, order| {
            coeffs.iter().map(|&c| Jet::constant(dim, order, c)).collect()
        })
    }

    /// `c · dx_{i₁} ∧ … ∧ dx_{i_k}` for arbitrary (unsorted) real indices.
    pub fn basis_form(n: usize, indices: &[usize], c: f64) -> Self {
        let dim = 2 * n;
        let mut idx = indices.to_vec();
        let basis = Basis::get(dim, idx.len());
        let mut coeffs = vec![0.0; basis.len()];
        if let Some(sign) = crate::form::basis::sort_with_sign(&mut idx) {
            coeffs[basis.index_of(&idx).expect("index in range")] = sign * c;
        }
        Self::constant(n, indices.len(), coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.eval.is_none()
    }

    pub fn len(&self) -> usize {
        Basis::get(self.dim(), self.degree).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficient jets of the given order at `p`.
    pub fn jets(&self, p: &Point, order: usize) -> Vec<Jet> {
        self.jets_at(p.coords(), order)
    }

    pub(crate) fn jets_at(&self, p: &[f64], order: usize) -> Vec<Jet> {
        debug_assert_eq!(p.len(), self.dim());
        match &self.eval {
            Some(f) => f(p, order),
            None => vec![Jet::zero(self.dim(), order); self.len()],
        }
    }

    pub fn coefficients(&self, p: &Point) -> Vec<f64> {
        if self.is_zero() {
            return vec![0.0; self.len()];
        }
        self.jets(p, 0).iter().map(Jet::value).collect()
    }

    /// `α_p(v₁, …, v_k)`.
    pub fn evaluate(&self, p: &Point, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.degree, "need one vector per slot");
        let coeffs = self.coefficients(p);
        evaluate_coeffs(self.dim(), self.degree, &coeffs, vectors)
    }

    pub fn sup_norm_at(&self, p: &Point) -> f64 {
        self.coefficients(p).iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_same_shape(&self, other: &KForm) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.degree != other.degree {
            return Err(Error::Degree {
                op: "add",
                degree: other.degree,
                reason: "summands must share a degree",
            });
        }
        Ok(())
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &KForm, b: f64) -> Result<KForm> {
        self.check_same_shape(other)?;
        match (self.is_zero() || a == 0.0, other.is_zero() || b == 0.0) {
            (true, true) => return Ok(KForm::zero(self.n, self.degree)),
            (false, true) => return Ok(self.scale(a)),
            (true, false) => return Ok(other.scale(b)),
            _ => {}
        }
        let (x, y) = (self.clone(), other.clone());
        Ok(KForm::raw(
            self.n,
            self.degree,
            self.depth.max(other.depth),
            move |p, order| {
                let mut u = x.jets_at(p, order);
                let v = y.jets_at(p, order);
                for (ui, vi) in u.iter_mut().zip(&v) {
                    *ui = ui.scale(a);
                    ui.axpy(b, vi);
                }
                u
            },
        ))
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, k: f64) -> KForm {
        if self.is_zero() || k == 0.0 {
            return KForm::zero(self.n, self.degree);
        }
        let x = self.clone();
        KForm::raw(self.n, self.degree, self.depth, move |p, order| {
            x.jets_at(p, order).iter().map(|j| j.scale(k)).collect()
        })
    }

    /// Pointwise product `f · α`.
    pub fn mul_scalar(&self, f: &ScalarField) -> Result<KForm> {
        if self.n != f.n() {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: f.n(),
            });
        }
        if self.is_zero() || f.is_zero() {
            return Ok(KForm::zero(self.n, self.degree));
        }
        let (x, g) = (self.clone(), f.clone());
        Ok(KForm::raw(
            self.n,
            self.degree,
            self.depth.max(f.depth()),
            move |p, order| {
                let s = g.jet_at(p, order);
                x.jets_at(p, order).iter().map(|j| j * &s).collect()
            },
        ))
    }
}

pub(crate) fn evaluate_coeffs(dim: usize, degree: usize, coeffs: &[f64], vectors: &[&[f64]]) -> f64 {
    let basis = Basis::get(dim, degree);
    basis
        .combos
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| **c != 0.0)
        .map(|(combo, c)| {
            let m: Vec<Vec<f64>> = combo
                .iter()
                .map(|&r| vectors.iter().map(|v| v[r]).collect())
                .collect();
            c * if degree == 0 { 1.0 } else { det(m) }
        })
        .sum()
}

/// A smooth real function, evaluable with exact jets (degree-0 form).
#[derive(Clone, Debug)]
pub struct ScalarField(KForm);

impl ScalarField {
    pub fn from_fn(n: usize, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> Self {
        Self(KForm::from_fn(n, 0, move |x| vec![f(x)]))
    }

    pub(crate) fn raw(
        n: usize,
        depth: usize,
        f: impl Fn(&[f64], usize) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self(KForm::raw(n, 0, depth, move |p, order| vec![f(p, order)]))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(KForm::constant(n, 0, vec![c]))
    }

    pub fn from_form(form: KForm) -> Result<Self> {
        if form.degree() != 0 {
            return Err(Error::Degree {
                op: "scalar field",
                degree: form.degree(),
                reason: "expected a 0-form",
            });
        }
        Ok(Self(form))
    }

    pub fn as_form(&self) -> &KForm {
        &self.0
    }

    pub fn into_form(self) -> KForm {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn jet(&self, p: &Point, order: usize) -> Jet {
        self.jet_at(p.coords(), order)
    }

    pub(crate) fn jet_at(&self, p: &[f64], order: usize) -> Jet {
        self.0.jets_at(p, order).pop().expect("one coefficient")
    }

    pub fn value(&self, p: &Point) -> f64 {
        self.jet(p, 0).value()
    }

    pub fn gradient(&self, p: &Point) -> Vec<f64> {
        self.jet(p, 1).gradient()
    }

    pub fn hessian(&self, p: &Point) -> Vec<Vec<f64>> {
        self.jet(p, 2).hessian()
    }

    /// Compose with a univariate jet function, e.g. `|j| j.exp()`.
    pub fn map(&self, f: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> ScalarField {
        let g = self.clone();
        ScalarField::raw(self.n(), self.depth(), move |p, order| f(&g.jet_at(p, order)))
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        Ok(ScalarField(self.0.mul_scalar(other)?))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        Ok(ScalarField(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        Ok(ScalarField(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, k: f64) -> ScalarField {
        ScalarField(self.0.scale(k))
    }
}

/// A smooth vector field with `2n` jet-valued components.
#[derive(Clone)]
pub struct VectorField {
    n: usize,
    depth: usize,
    eval: Option<Arc<EvalFn>>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("n", &self.n)
            .field("zero", &self.eval.is_none())
            .finish()
    }
}

impl VectorField {
    pub(crate) fn raw(
        n: usize,
        depth: usize,
        eval: impl Fn(&[f64], usize) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            depth,
            eval: Some(Arc::new(eval)),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        Self::raw(n, 0, move |p, order| {
            let out = f(&Jet::coordinates(p, order));
            assert_eq!(out.len(), 2 * n, "vector field closure returned wrong length");
            out
        })
    }

    /// The linear field `p ↦ M p` for a real `2n × 2n` matrix.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Self {
        let dim = matrix.len();
        assert!(dim.is_multiple_of(2) && matrix.iter().all(|r| r.len() == dim));
        if matrix.iter().flatten().all(|&m| m == 0.0) {
            return Self::zero(dim / 2);
        }
        Self::from_fn(dim / 2, move |x| {
            matrix
                .iter()
                .map(|row| {
                    let mut acc = Jet::zero(dim, x[0].order());
                    for (m, xi) in row.iter().zip(x) {
                        acc.axpy(*m, xi);
                    }
                    acc
                })
                .collect()
        })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, depth: 0, eval: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.eval.is_none()
    }

    pub fn jets(&self, p: &Point, order: usize) -> Vec<Jet> {
        self.jets_at(p.coords(), order)
    }

    pub(crate) fn jets_at(&self, p: &[f64], order: usize) -> Vec<Jet> {
        match &self.eval {
            Some(f) => f(p, order),
            None => vec![Jet::zero(2 * self.n, order); 2 * self.n],
        }
    }

    pub fn components(&self, p: &Point) -> Vec<f64> {
        self.jets(p, 0).iter().map(Jet::value).collect()
    }

    /// `(IX)(p) = I · X(p)` with the standard complex structure.
    pub fn apply_i(&self) -> VectorField {
        if self.is_zero() {
            return self.clone();
        }
        let x = self.clone();
        VectorField::raw(self.n, self.depth, move |p, order| {
            let v = x.jets_at(p, order);
            ComplexStructure::apply_to_jets(&v)
        })
    }

    pub fn scale(&self, k: f64) -> VectorField {
        if self.is_zero() || k == 0.0 {
            return VectorField::zero(self.n);
        }
        let x = self.clone();
        VectorField::raw(self.n, self.depth, move |p, order| {
            x.jets_at(p, order).iter().map(|j| j.scale(k)).collect()
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let (x, y) = (self.clone(), other.clone());
        Ok(VectorField::raw(
            self.n,
            self.depth.max(other.depth),
            move |p, order| {
                let mut u = x.jets_at(p, order);
                for (a, b) in u.iter_mut().zip(&y.jets_at(p, order)) {
                    *a += b;
                }
                u
            },
        ))
    }
}

/// The standard complex structure: `I ∂x_j = ∂y_j`, `I ∂y_j = −∂x_j`.
#[derive(Clone, Copy, Debug)]
pub struct ComplexStructure {
    pub n: usize,
}

impl ComplexStructure {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Column `i` is `I e_i`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let dim = 2 * self.n;
        let mut m = vec![vec![0.0; dim]; dim];
        for j in 0..self.n {
            m[2 * j + 1][2 * j] = 1.0;
            m[2 * j][2 * j + 1] = -1.0;
        }
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for j in 0..v.len() / 2 {
            out[2 * j] = -v[2 * j + 1];
            out[2 * j + 1] = v[2 * j];
        }
        out
    }

    pub(crate) fn apply_to_jets(v: &[Jet]) -> Vec<Jet> {
        let mut out = Vec::with_capacity(v.len());
        for j in 0..v.len() / 2 {
            out.push(-&v[2 * j + 1]);
            out.push(v[2 * j].clone());
        }
        out
    }
}
