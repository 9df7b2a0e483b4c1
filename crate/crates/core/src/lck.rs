//! LCK structures: validation, Lee-form extraction, conformal rescaling,
//! automorphy and the Vaisman condition.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::flows::{complex_structure_matrix, pullback, LinearMap};
use crate::form::{d_jets, exterior_d, wedge, Basis, KForm, Point, ScalarField};
use crate::jet::{self, Jet};
use crate::sampling::{try_worst_over, worst_over};

/// Threshold on the smallest eigenvalue of `g` for positivity.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

const PIVOT_FLOOR: f64 = 1e-12;

/// Rows of the linear map `θ ↦ θ ∧ ω` (3-form index by 1-form index).
fn wedge_matrix(dim: usize, omega: &[Jet]) -> Vec<Vec<Jet>> {
    let order = omega[0].order();
    let rows = Basis::get(dim, 3).len();
    let mut m = vec![vec![Jet::zero(dim, order); dim]; rows];
    for &(ia, ib, out, sign) in &crate::form::basis::WedgeTable::get(dim, 1, 2).entries {
        m[out][ia].axpy(sign, &omega[ib]);
    }
    m
}

/// Least-squares Lee form jets at `p`, or `None` if `θ ↦ θ∧ω` is rank-deficient.
fn lee_jets(omega: &KForm, p: &[f64], order: usize) -> Option<Vec<Jet>> {
    let dim = omega.dim();
    let w1 = omega.jets_at(p, order + 1);
    let dw = d_jets(dim, 2, &w1, Basis::get(dim, 3).len());
    let w: Vec<Jet> = w1.iter().map(|j| j.truncate(order)).collect();
    let m = wedge_matrix(dim, &w);
    let mut a = vec![vec![Jet::zero(dim, order); dim]; dim];
    let mut b = vec![Jet::zero(dim, order); dim];
    for (row, rhs) in m.iter().zip(&dw) {
        for i in 0..dim {
            if row[i].max_abs() == 0.0 {
                continue;
            }
            b[i] += &(&row[i] * rhs);
            for j in 0..dim {
                if row[j].max_abs() != 0.0 {
                    a[i][j] += &(&row[i] * &row[j]);
                }
            }
        }
    }
    jet::solve(a, b, PIVOT_FLOOR)
}

fn require_two_form(omega: &KForm, op: &'static str) -> Result<()> {
    if omega.degree() != 2 {
        return Err(Error::Degree {
            op,
            degree: omega.degree(),
            reason: "expected a 2-form",
        });
    }
    Ok(())
}

/// `‖dω − θ∧ω‖∞` at one point.
pub fn defining_residual(omega: &KForm, theta: &KForm, p: &Point) -> Result<f64> {
    let lhs = exterior_d(omega)?;
    let rhs = wedge(theta, omega)?;
    Ok(sup_diff(&lhs.coefficients(p), &rhs.coefficients(p)))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Result of [`extract_lee_form`].
#[derive(Clone, Debug)]
pub struct LeeForm {
    pub theta: KForm,
    /// Sup over samples of `‖dω − θ∧ω‖∞`.
    pub residual: f64,
    /// Sup over samples of `‖dθ‖∞`.
    pub closedness: f64,
    pub worst_point: Option<Point>,
}

/// Solve `dω = θ ∧ ω` for `θ` pointwise by least squares; jets of `θ` come
/// from differentiating the normal equations.
///
/// Fails with [`Error::NotLck`] when the defining residual or `dθ` exceed
/// `tol` on `samples`, and with [`Error::Rank`] where `ω` is degenerate.
pub fn extract_lee_form(omega: &KForm, samples: &[Point], tol: f64) -> Result<LeeForm> {
    require_two_form(omega, "extract_lee_form")?;
    if omega.n() < 2 {
        return Err(Error::Precondition(
            "Lee form extraction needs complex dimension n >= 2".into(),
        ));
    }
    if omega.is_zero() {
        return Err(Error::Rank("omega is identically zero".into()));
    }
    crate::form::check_depth(omega.depth() + 2)?;
    let w = omega.clone();
    let theta = KForm::raw(omega.n(), 1, omega.depth() + 1, move |p, order| {
        lee_jets(&w, p, order).unwrap_or_else(|| vec![Jet::constant(p.len(), order, f64::NAN); p.len()])
    });
    for p in samples {
        if lee_jets(omega, p.coords(), 0).is_none() {
            return Err(Error::Rank(format!("theta -> theta ^ omega is rank-deficient at {p}")));
        }
    }
    let (residual, i_res) = try_worst_over(samples, |p| defining_residual(omega, &theta, p))?;
    let dtheta = exterior_d(&theta)?;
    let (closedness, i_cl) = worst_over(samples, |p| dtheta.sup_norm_at(p));
    if residual > tol {
        return Err(Error::NotLck {
            what: "d omega - theta ^ omega",
            residual,
            tolerance: tol,
            point: samples[i_res].clone(),
        });
    }
    if closedness > tol {
        return Err(Error::NotLck {
            what: "d theta",
            residual: closedness,
            tolerance: tol,
            point: samples[i_cl].clone(),
        });
    }
    Ok(LeeForm {
        theta,
        residual,
        closedness,
        worst_point: samples.get(i_res.max(i_cl)).cloned(),
    })
}

/// Residual diagnostics gathered by [`LckStructure::validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LckResiduals {
    pub defining: f64,
    pub closedness: f64,
    pub i_invariance: f64,
    pub min_eigenvalue: f64,
    pub samples: usize,
}

/// A Hermitian 2-form `ω` with Lee form `θ`, `dω = θ∧ω`, `dθ = 0`.
#[derive(Clone, Debug)]
pub struct LckStructure {
    omega: KForm,
    theta: KForm,
    residuals: LckResiduals,
}

impl LckStructure {
    /// Wrap `(ω, θ)` after validating every invariant on `samples`.
    pub fn new(omega: KForm, theta: KForm, samples: &[Point], tol: f64) -> Result<Self> {
        let mut s = Self::from_parts(omega, theta)?;
        s.residuals = s.validate(samples, tol)?;
        Ok(s)
    }

    /// Extract `θ` from `ω` and validate.
    pub fn from_omega(omega: KForm, samples: &[Point], tol: f64) -> Result<Self> {
        let lee = extract_lee_form(&omega, samples, tol)?;
        Self::new(omega, lee.theta, samples, tol)
    }

    /// Unvalidated pair; callers are expected to run [`validate`](Self::validate).
    pub fn from_parts(omega: KForm, theta: KForm) -> Result<Self> {
        require_two_form(&omega, "LCK structure")?;
        if theta.degree() != 1 {
            return Err(Error::Degree {
                op: "LCK structure",
                degree: theta.degree(),
                reason: "Lee form must be a 1-form",
            });
        }
        if omega.n() != theta.n() {
            return Err(Error::DimensionMismatch {
                left: omega.n(),
                right: theta.n(),
            });
        }
        Ok(Self {
            omega,
            theta,
            residuals: LckResiduals::default(),
        })
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    pub fn theta(&self) -> &KForm {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.omega.n()
    }

    pub fn residuals(&self) -> &LckResiduals {
        &self.residuals
    }

    pub fn metric(&self) -> HermitianMetric {
        HermitianMetric::new(self.omega.clone())
    }

    /// Check positivity, I-invariance, `dω = θ∧ω` and `dθ = 0` on `samples`.
    pub fn validate(&self, samples: &[Point], tol: f64) -> Result<LckResiduals> {
        let metric = self.metric();
        let mut min_eig = f64::INFINITY;
        for p in samples {
            let e = metric.min_eigenvalue(p);
            if !(e > POSITIVITY_FLOOR) {
                return Err(Error::Geometry {
                    point: p.clone(),
                    reason: format!("metric not positive definite (min eigenvalue {e:e})"),
                });
            }
            min_eig = min_eig.min(e);
        }
        let (i_inv, i_i) = worst_over(samples, |p| i_invariance_residual(&self.omega, p));
        if i_inv > tol {
            return Err(Error::NotLck {
                what: "omega(IX, IY) - omega(X, Y)",
                residual: i_inv,
                tolerance: tol,
                point: samples[i_i].clone(),
            });
        }
        let (defining, i_d) = try_worst_over(samples, |p| defining_residual(&self.omega, &self.theta, p))?;
        if defining > tol {
            return Err(Error::NotLck {
                what: "d omega - theta ^ omega",
                residual: defining,
                tolerance: tol,
                point: samples[i_d].clone(),
            });
        }
        let dtheta = exterior_d(&self.theta)?;
        let (closedness, i_c) = worst_over(samples, |p| dtheta.sup_norm_at(p));
        if closedness > tol {
            return Err(Error::NotLck {
                what: "d theta",
                residual: closedness,
                tolerance: tol,
                point: samples[i_c].clone(),
            });
        }
        Ok(LckResiduals {
            defining,
            closedness,
            i_invariance: i_inv,
            min_eigenvalue: if samples.is_empty() { 0.0 } else { min_eig },
            samples: samples.len(),
        })
    }
}

/// Antisymmetric matrix `Ω_ab = ω(e_a, e_b)` from coefficients.
pub(crate) fn two_form_matrix<T: Clone>(dim: usize, coeffs: &[T], zero: T, neg: impl Fn(&T) -> T) -> Vec<Vec<T>> {
    let mut m = vec![vec![zero; dim]; dim];
    for (idx, combo) in Basis::get(dim, 2).combos.iter().enumerate() {
        let (a, b) = (combo[0], combo[1]);
        m[b][a] = neg(&coeffs[idx]);
        m[a][b] = coeffs[idx].clone();
    }
    m
}

/// `max |ω(IX, IY) − ω(X, Y)|` over basis pairs.
pub fn i_invariance_residual(omega: &KForm, p: &Point) -> f64 {
    let dim = omega.dim();
    let c = omega.coefficients(p);
    let w = DMatrix::from_row_slice(dim, dim, &two_form_matrix(dim, &c, 0.0, |x| -x).concat());
    let j = complex_structure_matrix(omega.n());
    (j.transpose() * &w * &j - &w).amax()
}

/// The Riemannian metric `g(X, Y) = ω(IX, Y)` of a Hermitian 2-form.
#[derive(Clone, Debug)]
pub struct HermitianMetric {
    omega: KForm,
}

impl HermitianMetric {
    pub fn new(omega: KForm) -> Self {
        Self { omega }
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    /// Component jets `g_ab` at `p`.
    pub fn jets(&self, p: &[f64], order: usize) -> Vec<Vec<Jet>> {
        let dim = self.omega.dim();
        let w = self.omega.jets_at(p, order);
        metric_from_omega_jets(dim, &w)
    }

    pub fn matrix(&self, p: &Point) -> DMatrix<f64> {
        let dim = self.omega.dim();
        let g = self.jets(p.coords(), 0);
        DMatrix::from_fn(dim, dim, |i, j| g[i][j].value())
    }

    pub fn eval(&self, p: &Point, x: &[f64], y: &[f64]) -> f64 {
        let g = self.matrix(p);
        let dim = x.len();
        (0..dim).map(|i| (0..dim).map(|j| x[i] * g[(i, j)] * y[j]).sum::<f64>()).sum()
    }

    /// Smallest eigenvalue of the symmetrized `g`; `−∞` if `g` is not symmetric.
    pub fn min_eigenvalue(&self, p: &Point) -> f64 {
        let g = self.matrix(p);
        if (&g - g.transpose()).amax() > 1e-10 * (1.0 + g.amax()) {
            return f64::NEG_INFINITY;
        }
        let sym = (&g + g.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Christoffel symbols `Γ[k][i][j]` of the Levi-Civita connection.
    pub fn christoffel(&self, p: &Point) -> Result<Vec<Vec<Vec<f64>>>> {
        let dim = self.omega.dim();
        let g = self.jets(p.coords(), 1);
        let gv = DMatrix::from_fn(dim, dim, |i, j| g[i][j].value());
        let ginv = gv.try_inverse().ok_or_else(|| Error::Geometry {
            point: p.clone(),
            reason: "metric is singular".into(),
        })?;
        let dg = |k: usize, i: usize, j: usize| g[i][j].coeffs()[1 + k];
        let mut gamma = vec![vec![vec![0.0; dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let lowered: Vec<f64> = (0..dim)
                    .map(|l| 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j)))
                    .collect();
                for k in 0..dim {
                    gamma[k][i][j] = (0..dim).map(|l| ginv[(k, l)] * lowered[l]).sum();
                }
            }
        }
        Ok(gamma)
    }

    /// `max |∇_k g_ij|` from the computed Christoffel symbols.
    pub fn levi_civita_residual(&self, p: &Point) -> Result<f64> {
        let dim = self.omega.dim();
        let g = self.jets(p.coords(), 1);
        let gamma = self.christoffel(p)?;
        let mut worst: f64 = 0.0;
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut v = g[i][j].coeffs()[1 + k];
                    for l in 0..dim {
                        v -= gamma[l][k][i] * g[l][j].value() + gamma[l][k][j] * g[i][l].value();
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        Ok(worst)
    }

    /// `(∇θ)_ij = ∂_i θ_j − Γ^k_ij θ_k` for a 1-form.
    pub fn covariant_derivative(&self, theta: &KForm, p: &Point) -> Result<Vec<Vec<f64>>> {
        let dim = self.omega.dim();
        let t = theta.jets(p, 1);
        let gamma = self.christoffel(p)?;
        Ok((0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let mut v = t[j].coeffs()[1 + i];
                        for k in 0..dim {
                            v -= gamma[k][i][j] * t[k].value();
                        }
                        v
                    })
                    .collect()
            })
            .collect())
    }
}

/// `g_ab = ω(I e_a, e_b) = Σ_c J_ca Ω_cb`.
pub(crate) fn metric_from_omega_jets(dim: usize, w: &[Jet]) -> Vec<Vec<Jet>> {
    let order = w[0].order();
    let om = two_form_matrix(dim, w, Jet::zero(dim, order), |x| -x);
    // J e_{2m} = e_{2m+1}, J e_{2m+1} = −e_{2m}
    (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    if a % 2 == 0 {
                        om[a + 1][b].clone()
                    } else {
                        -&om[a - 1][b]
                    }
                })
                .collect()
        })
        .collect()
}

/// The deck character `γ ↦ χ(γ)` of a cyclic deck group, stored by its value
/// on the generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightCharacter {
    generator: f64,
}

impl WeightCharacter {
    pub fn new(generator: f64) -> Result<Self> {
        if !(generator > 0.0 && generator.is_finite()) {
            return Err(Error::Precondition(format!(
                "weight character must be positive, got {generator}"
            )));
        }
        Ok(Self { generator })
    }

    pub fn generator(&self) -> f64 {
        self.generator
    }

    /// `χ(γ^k)`.
    pub fn value(&self, k: i32) -> f64 {
        self.generator.powi(k)
    }

    pub fn compose(&self, other: &WeightCharacter) -> WeightCharacter {
        WeightCharacter {
            generator: self.generator * other.generator,
        }
    }
}

/// `sup_p ‖deck^*α − χ α‖∞` over coefficients (evaluations on basis tuples).
pub fn check_automorphy(a: &KForm, deck: &LinearMap, chi: f64, samples: &[Point]) -> Result<f64> {
    let pulled = pullback(deck, a)?;
    Ok(worst_over(samples, |p| {
        let x = pulled.coefficients(p);
        let y = a.coefficients(p);
        x.iter().zip(&y).fold(0.0, |m, (u, v)| m.max((u - chi * v).abs()))
    })
    .0)
}

/// `ω′ = e^{−f} ω` with Lee form recomputed by extraction.
///
/// The extracted `θ′` is checked against `θ + s·df` with `s` the frozen
/// rescaling sign, then the result is revalidated.
pub fn conformal_rescale(s: &LckStructure, f: &ScalarField, samples: &[Point], tol: f64) -> Result<LckStructure> {
    if f.n() != s.n() {
        return Err(Error::DimensionMismatch {
            left: s.n(),
            right: f.n(),
        });
    }
    if f.is_zero() {
        return Ok(s.clone());
    }
    let omega = s.omega.mul_scalar(&f.map(|j| j.scale(-1.0).exp()))?;
    let lee = extract_lee_form(&omega, samples, tol)?;
    let expected = s.theta.combine(1.0, &exterior_d(f.as_form())?, crate::conventions::RESCALE_LEE_SIGN)?;
    let (mismatch, i) = worst_over(samples, |p| sup_diff(&lee.theta.coefficients(p), &expected.coefficients(p)));
    if mismatch > tol {
        return Err(Error::NotLck {
            what: "rescaled Lee form vs theta - df",
            residual: mismatch,
            tolerance: tol,
            point: samples[i].clone(),
        });
    }
    LckStructure::new(omega, lee.theta, samples, tol)
}

/// Sup-norm of `∇θ` over the sample with the verdict at `tol`.
#[derive(Clone, Debug)]
pub struct VaismanReport {
    pub nabla_theta: f64,
    pub levi_civita: f64,
    pub worst_point: Option<Point>,
    pub vaisman: bool,
}

/// `∇θ = 0` check with the Levi-Civita connection of `g`.
pub fn is_vaisman(s: &LckStructure, samples: &[Point], tol: f64) -> Result<VaismanReport> {
    let metric = s.metric();
    for p in samples {
        let e = metric.min_eigenvalue(p);
        if !(e > POSITIVITY_FLOOR) {
            return Err(Error::Geometry {
                point: p.clone(),
                reason: format!("metric not positive definite (min eigenvalue {e:e})"),
            });
        }
    }
    let (nabla, i) = try_worst_over(samples, |p| {
        let d = metric.covariant_derivative(&s.theta, p)?;
        Ok(d.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
    })?;
    let (lc, _) = try_worst_over(samples, |p| metric.levi_civita_residual(p))?;
    Ok(VaismanReport {
        nabla_theta: nabla,
        levi_civita: lc,
        worst_point: samples.get(i).cloned(),
        vaisman: nabla <= tol,
    })
}

/// `φ = g̃(θ♯, θ♯)`, `θ♯ = g⁻¹θ` raised with the LCK metric and paired with
/// the Kähler metric of `kahler_form`.
pub fn vaisman_potential(
    s: &LckStructure,
    kahler_form: &KForm,
    lifted_theta: &KForm,
    samples: &[Point],
    tol: f64,
) -> Result<ScalarField> {
    require_two_form(kahler_form, "vaisman_potential")?;
    if lifted_theta.is_zero() || samples.iter().all(|p| lifted_theta.sup_norm_at(p) == 0.0) {
        return Err(Error::Precondition(
            "Lee form vanishes; the pairing is not a Kahler potential".into(),
        ));
    }
    let report = is_vaisman(s, samples, tol)?;
    if !report.vaisman {
        return Err(Error::Precondition(format!(
            "structure is not Vaisman (|nabla theta| = {:e})",
            report.nabla_theta
        )));
    }
    let (omega, kahler, theta) = (s.omega.clone(), kahler_form.clone(), lifted_theta.clone());
    let dim = omega.dim();
    let depth = omega.depth().max(kahler.depth()).max(theta.depth());
    Ok(ScalarField::raw(s.n(), depth, move |p, order| {
        let g = metric_from_omega_jets(dim, &omega.jets_at(p, order));
        let gk = metric_from_omega_jets(dim, &kahler.jets_at(p, order));
        let t = theta.jets_at(p, order);
        let Some(sharp) = jet::solve(g, t, PIVOT_FLOOR) else {
            return Jet::constant(dim, order, f64::NAN);
        };
        let mut acc = Jet::zero(dim, order);
        for a in 0..dim {
            for b in 0..dim {
                acc += &(&(&sharp[a] * &gk[a][b]) * &sharp[b]);
            }
        }
        acc
    }))
}
