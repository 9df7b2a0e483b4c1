//! Linear maps and flows on `ℝ²ⁿ`, pullbacks, circle averages and loop integrals.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::form::{exterior_d, induced_jets, InducedMap, KForm, Point, ScalarField};
use crate::jet::Jet;

const SINGULAR_DET: f64 = 1e-14;

/// A real `2n × 2n` matrix acting on coordinates `(x₁, y₁, …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::Config(format!("linear map must be 2n x 2n, got {dim} rows")));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.len(),
            });
        }
        Ok(Self {
            matrix: DMatrix::from_fn(dim, dim, |i, j| rows[i][j]),
        })
    }

    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::Config("linear map must be 2n x 2n".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Realification of a complex `n × n` matrix.
    pub fn from_complex(c: &DMatrix<Complex64>) -> Result<Self> {
        if !c.is_square() || c.nrows() == 0 {
            return Err(Error::Config("complex matrix must be square".into()));
        }
        let n = c.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = c[(i, j)];
                m[(2 * i, 2 * j)] = z.re;
                m[(2 * i, 2 * j + 1)] = -z.im;
                m[(2 * i + 1, 2 * j)] = z.im;
                m[(2 * i + 1, 2 * j + 1)] = z.re;
            }
        }
        Ok(Self { matrix: m })
    }

    /// `α · Id` on `ℂⁿ`.
    pub fn complex_scalar(n: usize, alpha: Complex64) -> Self {
        Self::from_complex(&DMatrix::from_diagonal_element(n, n, alpha)).expect("square")
    }

    /// Inverse of [`from_complex`](Self::from_complex); `None` unless complex-linear.
    pub fn to_complex(&self) -> Option<DMatrix<Complex64>> {
        if !self.is_complex_linear(1e-12) {
            return None;
        }
        let n = self.n();
        Some(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.matrix[(2 * i, 2 * j)], self.matrix[(2 * i + 1, 2 * j)])
        }))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.dim() / 2
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    /// `‖MJ − JM‖_max` against the standard complex structure.
    pub fn complex_linearity_residual(&self) -> f64 {
        let j = complex_structure_matrix(self.n());
        (&self.matrix * &j - &j * &self.matrix).amax()
    }

    pub fn is_complex_linear(&self, tol: f64) -> bool {
        self.complex_linearity_residual() <= tol
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn apply_point(&self, p: &Point) -> Result<Point> {
        Point::new(self.apply(p.coords()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(LinearMap {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn inverse(&self) -> Result<LinearMap> {
        let det = self.det();
        if det.abs() < SINGULAR_DET {
            return Err(Error::SingularMap { det });
        }
        self.matrix
            .clone()
            .try_inverse()
            .map(|matrix| LinearMap { matrix })
            .ok_or(Error::SingularMap { det })
    }

    pub fn pow(&self, k: u32) -> LinearMap {
        LinearMap {
            matrix: self.matrix.pow(k),
        }
    }

    pub fn scale(&self, c: f64) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * c,
        }
    }

    pub fn distance(&self, other: &LinearMap) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    /// Complex eigenvalues of the underlying complex matrix (complex-linear maps only).
    pub fn complex_eigenvalues(&self) -> Option<Vec<Complex64>> {
        let c = self.to_complex()?;
        let eig = c.eigenvalues()?;
        Some(eig.iter().copied().collect())
    }
}

pub(crate) fn complex_structure_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Precomputed data for pulling back `k`-forms by one map.
#[derive(Clone)]
struct PullbackKernel {
    map: LinearMap,
    rows: Vec<Vec<f64>>,
    induced: Arc<InducedMap>,
}

impl PullbackKernel {
    fn new(map: &LinearMap, k: usize) -> Self {
        let rows = map.rows();
        let induced = Arc::new(InducedMap::new(&rows, k));
        Self {
            map: map.clone(),
            rows,
            induced,
        }
    }

    fn apply(&self, a: &KForm, p: &[f64], order: usize) -> Vec<Jet> {
        let q = self.map.apply(p);
        let at_q: Vec<Jet> = a
            .jets_at(&q, order)
            .iter()
            .map(|j| j.compose_linear(&self.rows))
            .collect();
        induced_jets(&self.induced, &at_q)
    }
}

/// `(F^*α)_p(v…) = α_{F(p)}(Fv…)`.
pub fn pullback(map: &LinearMap, a: &KForm) -> Result<KForm> {
    if map.n() != a.n() {
        return Err(Error::DimensionMismatch {
            left: map.n(),
            right: a.n(),
        });
    }
    let det = map.det();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularMap { det });
    }
    if a.is_zero() {
        return Ok(a.clone());
    }
    let kernel = PullbackKernel::new(map, a.degree());
    let x = a.clone();
    Ok(KForm::raw(a.n(), a.degree(), a.depth(), move |p, order| {
        kernel.apply(&x, p, order)
    }))
}

pub fn pullback_scalar(map: &LinearMap, f: &ScalarField) -> Result<ScalarField> {
    ScalarField::from_form(pullback(map, f.as_form())?)
}

/// The flow `t ↦ exp(tG)` of the linear field `z ↦ Gz`.
#[derive(Clone, Debug)]
pub struct LinearFlow {
    generator: LinearMap,
}

impl LinearFlow {
    pub fn new(generator: LinearMap) -> Self {
        Self { generator }
    }

    pub fn generator(&self) -> &LinearMap {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.generator.n()
    }

    pub fn at(&self, t: f64) -> LinearMap {
        LinearMap {
            matrix: (&self.generator.matrix * t).exp(),
        }
    }

    /// Same orbits traversed `c` times as fast.
    pub fn speed_up(&self, c: f64) -> LinearFlow {
        LinearFlow::new(self.generator.scale(c))
    }
}

pub fn flow_pullback_form(flow: &LinearFlow, t: f64, a: &KForm) -> Result<KForm> {
    pullback(&flow.at(t), a)
}

/// A circle action `t ↦ exp(tG)` with `exp(TG) = D`, `D` the identity or a
/// deck transformation of the covering.
#[derive(Clone, Debug)]
pub struct CircleAction {
    flow: LinearFlow,
    period: f64,
    deck: LinearMap,
}

/// Tolerance on `‖exp(TG) − D‖`.
pub const PERIOD_TOL: f64 = 1e-10;

impl CircleAction {
    pub fn new(flow: LinearFlow, period: f64, deck: Option<LinearMap>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Config(format!("period must be positive, got {period}")));
        }
        let deck = deck.unwrap_or_else(|| LinearMap::identity(flow.n()));
        if deck.dim() != flow.generator.dim() {
            return Err(Error::DimensionMismatch {
                left: flow.n(),
                right: deck.n(),
            });
        }
        let residual = flow.at(period).distance(&deck);
        if residual > PERIOD_TOL {
            return Err(Error::Periodicity { residual });
        }
        Ok(Self { flow, period, deck })
    }

    /// Rotation `z ↦ e^{it} z` on all coordinates, period `2π`.
    pub fn rotation(n: usize) -> Self {
        let g = LinearMap::from_matrix(complex_structure_matrix(n)).expect("even");
        Self::new(LinearFlow::new(g), std::f64::consts::TAU, None).expect("exact rotation")
    }

    pub fn flow(&self) -> &LinearFlow {
        &self.flow
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn deck(&self) -> &LinearMap {
        &self.deck
    }

    pub fn n(&self) -> usize {
        self.flow.n()
    }

    /// Same loop traversed at speed `c`: generator `cG`, period `T/c`.
    pub fn reparametrize(&self, c: f64) -> Result<Self> {
        Self::new(self.flow.speed_up(c), self.period / c, Some(self.deck.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `N` equal nodes on a periodic interval, weights `h`.
    PeriodicTrapezoid,
    /// Composite Simpson with `N` (even) subintervals.
    Simpson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureRule {
    pub n: usize,
    pub scheme: Scheme,
}

pub const MIN_NODES: usize = 4;

impl QuadratureRule {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_scheme(n, Scheme::PeriodicTrapezoid)
    }

    pub fn with_scheme(n: usize, scheme: Scheme) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Config(format!("quadrature needs N >= {MIN_NODES}, got {n}")));
        }
        if scheme == Scheme::Simpson && !n.is_multiple_of(2) {
            return Err(Error::Config(format!("Simpson rule needs even N, got {n}")));
        }
        Ok(Self { n, scheme })
    }

    /// Nodes and weights on `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let h = (b - a) / self.n as f64;
        match self.scheme {
            Scheme::PeriodicTrapezoid => (0..self.n).map(|k| (a + k as f64 * h, h)).collect(),
            Scheme::Simpson => (0..=self.n)
                .map(|k| {
                    let w = if k == 0 || k == self.n {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    (a + k as f64 * h, w * h / 3.0)
                })
                .collect(),
        }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes(a, b).into_iter().map(|(t, w)| w * f(t)).sum()
    }
}

/// `Σ_k w_k · (exp(t_k G))^* α`.
pub(crate) fn weighted_flow_sum(flow: &LinearFlow, nodes: &[(f64, f64)], a: &KForm) -> Result<KForm> {
    if flow.n() != a.n() {
        return Err(Error::DimensionMismatch {
            left: flow.n(),
            right: a.n(),
        });
    }
    if a.is_zero() {
        return Ok(a.clone());
    }
    let kernels: Vec<(PullbackKernel, f64)> = nodes
        .iter()
        .filter(|(_, w)| *w != 0.0)
        .map(|&(t, w)| (PullbackKernel::new(&flow.at(t), a.degree()), w))
        .collect();
    let x = a.clone();
    let (dim, len) = (a.dim(), a.len());
    Ok(KForm::raw(a.n(), a.degree(), a.depth(), move |p, order| {
        let mut acc = vec![Jet::zero(dim, order); len];
        for (kernel, w) in &kernels {
            for (s, j) in acc.iter_mut().zip(kernel.apply(&x, p, order)) {
                s.axpy(*w, &j);
            }
        }
        acc
    }))
}

/// Period-normalized average `(1/T) Σ_k h · Φ_{t_k}^* α`, `t_k = kT/N`.
pub fn average_form_over_circle(action: &CircleAction, a: &KForm, q: &QuadratureRule) -> Result<KForm> {
    let t = action.period;
    let nodes: Vec<(f64, f64)> = q.nodes(0.0, t).into_iter().map(|(s, w)| (s, w / t)).collect();
    weighted_flow_sum(&action.flow, &nodes, a)
}

/// Period-normalized average of a function; jets come from differentiating
/// under the quadrature sum.
pub fn average_scalar_over_circle(
    action: &CircleAction,
    f: &ScalarField,
    q: &QuadratureRule,
) -> Result<ScalarField> {
    ScalarField::from_form(average_form_over_circle(action, f.as_form(), q)?)
}

/// Sup of `|dθ|` along the orbit nodes of `base`.
pub fn closedness_along_orbit(theta: &KForm, action: &CircleAction, base: &Point, q: &QuadratureRule) -> Result<f64> {
    let dtheta = exterior_d(theta)?;
    let mut worst: f64 = 0.0;
    for (t, _) in q.nodes(0.0, action.period) {
        let p = action.flow.at(t).apply_point(base)?;
        worst = worst.max(dtheta.sup_norm_at(&p));
    }
    Ok(worst)
}

/// `∫_0^T θ_{γ(t)}(γ′(t)) dt` along the orbit `γ(t) = exp(tG) p`.
///
/// Fails with [`Error::NotClosed`] when `|dθ|` exceeds `closed_tol` on the orbit.
pub fn loop_integral(
    theta: &KForm,
    action: &CircleAction,
    base: &Point,
    q: &QuadratureRule,
    closed_tol: f64,
) -> Result<f64> {
    if theta.degree() != 1 {
        return Err(Error::Degree {
            op: "loop_integral",
            degree: theta.degree(),
            reason: "expected a 1-form",
        });
    }
    if theta.n() != action.n() || base.n() != action.n() {
        return Err(Error::DimensionMismatch {
            left: theta.n(),
            right: action.n(),
        });
    }
    let residual = closedness_along_orbit(theta, action, base, q)?;
    if residual > closed_tol {
        return Err(Error::NotClosed {
            residual,
            tolerance: closed_tol,
        });
    }
    let g = &action.flow.generator;
    let mut total = 0.0;
    for (t, w) in q.nodes(0.0, action.period) {
        let p = action.flow.at(t).apply_point(base)?;
        let v = g.apply(p.coords());
        total += w * theta.evaluate(&p, &[&v]);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::wedge;

    fn flat(n: usize) -> KForm {
        let mut c = vec![0.0; crate::form::binomial(2 * n, 2)];
        let b = crate::form::Basis::get(2 * n, 2);
        for j in 0..n {
            c[b.index_of(&[2 * j, 2 * j + 1]).unwrap()] = -1.0;
        }
        KForm::constant(n, 2, c)
    }

    fn pt() -> Point {
        Point::new(vec![0.4, -0.2, 0.9, 1.3]).unwrap()
    }

    #[test]
    fn exp_group_law() {
        let g = LinearMap::new(vec![
            vec![0.1, -0.7, 0.2, 0.0],
            vec![0.7, 0.1, 0.0, 0.2],
            vec![-0.3, 0.0, -0.4, -1.1],
            vec![0.0, -0.3, 1.1, -0.4],
        ])
        .unwrap();
        let f = LinearFlow::new(g);
        assert!(f.at(0.0).distance(&LinearMap::identity(2)) < 1e-15);
        let (s, t) = (0.37, -0.81);
        let lhs = f.at(s + t);
        let rhs = f.at(s).compose(&f.at(t)).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn rotation_period_closes() {
        let r = CircleAction::rotation(2);
        assert!(r.flow().at(r.period()).distance(&LinearMap::identity(2)) < 1e-12);
    }

    #[test]
    fn bad_period_is_rejected() {
        let g = LinearMap::from_matrix(complex_structure_matrix(1)).unwrap();
        let r = CircleAction::new(LinearFlow::new(g), 3.0, None);
        assert!(matches!(r, Err(Error::Periodicity { .. })));
    }

    #[test]
    fn quadrature_of_cos_squared() {
        let q = QuadratureRule::new(8).unwrap();
        let v = q.integrate(0.0, 5.0, |t| (std::f64::consts::TAU * t / 5.0).cos().powi(2));
        assert!((v - 2.5).abs() < 1e-12);
        assert!(QuadratureRule::new(3).is_err());
        assert!(QuadratureRule::with_scheme(9, Scheme::Simpson).is_err());
    }

    #[test]
    fn scalar_pullback_of_flat_form() {
        let a = LinearMap::complex_scalar(2, Complex64::new(0.3, 0.4));
        let w = flat(2);
        let pw = pullback(&a, &w).unwrap();
        let p = pt();
        for (x, y) in pw.coefficients(&p).iter().zip(w.coefficients(&p)) {
            assert!((x - 0.25 * y).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_pullback_is_rejected() {
        let z = LinearMap::new(vec![vec![0.0; 2]; 2]).unwrap();
        assert!(matches!(pullback(&z, &flat(1)), Err(Error::SingularMap { .. })));
    }

    #[test]
    fn pullback_respects_wedge() {
        let a = KForm::from_fn(2, 1, |x| vec![x[1].sin(), x[0].clone(), &x[2] * &x[3], x[0].exp()]);
        let b = KForm::from_fn(2, 1, |x| vec![x[3].clone(), x[2].cos(), x[0].clone(), &x[1] * &x[1]]);
        let m = LinearFlow::new(LinearMap::new(vec![
            vec![0.2, 0.5, 0.0, 0.1],
            vec![-0.4, 0.1, 0.3, 0.0],
            vec![0.0, 0.2, -0.1, 0.6],
            vec![0.7, 0.0, 0.2, 0.3],
        ]).unwrap())
        .at(0.6);
        let lhs = pullback(&m, &wedge(&a, &b).unwrap()).unwrap();
        let rhs = wedge(&pullback(&m, &a).unwrap(), &pullback(&m, &b).unwrap()).unwrap();
        let p = pt();
        for (x, y) in lhs.coefficients(&p).iter().zip(rhs.coefficients(&p)) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
