//! Two-stage averaging: make `θ` invariant by a conformal change, then
//! average `ω` itself.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};
use crate::flows::{average_form_over_circle, loop_integral, CircleAction, QuadratureRule};
use crate::form::{check_depth, lie_derivative, KForm, Point, ScalarField, VectorField};
use crate::jet::{Jet, MonomialTable};
use crate::lck::{conformal_rescale, LckStructure};
use crate::sampling::worst_over;

/// Gauss–Legendre nodes per path segment.
pub const PATH_NODES: usize = 20;

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub structure: LckStructure,
    /// Potential of `θ_avg − θ`, normalized to vanish at the base point `e_1`.
    pub f: ScalarField,
    pub theta_avg: KForm,
    /// Sup of `|Lie_X ω′|` and `|Lie_X θ′|` over the samples.
    pub lie_omega: f64,
    pub lie_theta: f64,
    /// Worst disagreement between the two integration paths for `f`.
    pub path_mismatch: f64,
    /// `∫θ` along the action orbit of the first sample, before and after.
    pub monodromy_before: f64,
    pub monodromy_after: f64,
}

/// `∫_γ β` along the segment/arc decomposition.
struct PathIntegrator {
    beta: KForm,
    rule: GaussLegendre,
    /// Path values by coordinate bits; averages and validation revisit points.
    cache: Mutex<HashMap<Vec<u64>, f64>>,
}

impl PathIntegrator {
    fn new(beta: KForm) -> Self {
        let rule = GaussLegendre::new(PATH_NODES).expect("valid degree");
        Self {
            beta,
            rule,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn pairing(&self, x: &[f64], v: &[f64]) -> f64 {
        let p = Point::new(x.to_vec()).expect("path stays finite");
        self.beta.coefficients(&p).iter().zip(v).map(|(b, v)| b * v).sum()
    }

    /// `e^u b`, `u ∈ [ln r0, ln r1]`.
    fn radial(&self, dir: &[f64], r0: f64, r1: f64) -> f64 {
        self.rule.integrate(r0.ln(), r1.ln(), |u| {
            let x: Vec<f64> = dir.iter().map(|d| u.exp() * d).collect();
            self.pairing(&x, &x)
        })
    }

    /// Great circle of radius `r` from direction `a` to direction `b`.
    fn arc(&self, a: &[f64], b: &[f64], r: f64) -> f64 {
        let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0);
        let mut w: Vec<f64> = b.iter().zip(a).map(|(y, x)| y - c * x).collect();
        let mut wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn < 1e-12 {
            if c > 0.0 {
                return 0.0;
            }
            // antipodal; any orthogonal direction works
            let k = if a[0].abs() < 0.9 { 0 } else { 1 };
            w = vec![0.0; a.len()];
            w[k] = 1.0;
            let proj = a[k];
            for (wi, ai) in w.iter_mut().zip(a) {
                *wi -= proj * ai;
            }
            wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        let w: Vec<f64> = w.into_iter().map(|x| x / wn).collect();
        let phi = c.acos();
        self.rule.integrate(0.0, phi, |t| {
            let (s, co) = t.sin_cos();
            let x: Vec<f64> = a.iter().zip(&w).map(|(ai, wi)| r * (co * ai + s * wi)).collect();
            let v: Vec<f64> = a.iter().zip(&w).map(|(ai, wi)| r * (co * wi - s * ai)).collect();
            self.pairing(&x, &v)
        })
    }

    fn split(p: &[f64]) -> (f64, Vec<f64>) {
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        (r, p.iter().map(|x| x / r).collect())
    }

    /// Radial from `e_1` to `|p| e_1`, then along the sphere of radius `|p|`.
    fn radial_then_arc(&self, p: &[f64]) -> f64 {
        let (r, u) = Self::split(p);
        let base = base_direction(p.len());
        self.radial(&base, 1.0, r) + self.arc(&base, &u, r)
    }

    fn value(&self, p: &[f64]) -> f64 {
        let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
        if let Some(&v) = self.cache.lock().expect("path cache").get(&key) {
            return v;
        }
        let v = self.radial_then_arc(p);
        self.cache.lock().expect("path cache").insert(key, v);
        v
    }

    /// Along the unit sphere first, then radial.
    fn arc_then_radial(&self, p: &[f64]) -> f64 {
        let (r, u) = Self::split(p);
        let base = base_direction(p.len());
        self.arc(&base, &u, 1.0) + self.radial(&u, 1.0, r)
    }
}

fn base_direction(dim: usize) -> Vec<f64> {
    let mut b = vec![0.0; dim];
    b[0] = 1.0;
    b
}

/// A function with prescribed closed differential `β`, normalized at `e_1`.
///
/// Values come from the path integral, higher jet coefficients from the
/// jets of `β` (`c_α = β_{i, α−e_i} / α_i`).
fn primitive(integrator: Arc<PathIntegrator>) -> Result<ScalarField> {
    let beta = &integrator.beta;
    let (n, dim) = (beta.n(), beta.dim());
    let depth = check_depth(beta.depth() + 1)?;
    Ok(ScalarField::raw(n, depth, move |p, order| {
        let value = integrator.value(p);
        if order == 0 {
            return Jet::constant(dim, 0, value);
        }
        let b = integrator.beta.jets_at(p, order - 1);
        let table = MonomialTable::get(dim, order);
        let lower = MonomialTable::get(dim, order - 1);
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = value;
        for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
            let e = table.exponents(m);
            let i = e.iter().position(|&x| x > 0).expect("nonzero monomial");
            let mut down = e.to_vec();
            down[i] -= 1;
            let k = lower.index_of(&down).expect("lower monomial");
            *c = b[i].coeffs()[k] / e[i] as f64;
        }
        Jet::from_coeffs(dim, order, coeffs)
    }))
}

/// Generator of the action as a vector field.
fn action_field(action: &CircleAction) -> VectorField {
    VectorField::from_matrix(action.flow().generator().rows())
}

/// Average `θ`, rescale so the Lee form becomes `θ_avg`, then average `ω`.
///
/// Tolerances: `tol` bounds the revalidation residuals and the path
/// mismatch of `f`; invariance is reported, not enforced.
pub fn averaging_pipeline(
    s: &LckStructure,
    action: &CircleAction,
    q: &QuadratureRule,
    samples: &[Point],
    tol: f64,
) -> Result<PipelineResult> {
    if action.n() != s.n() {
        return Err(Error::DimensionMismatch {
            left: s.n(),
            right: action.n(),
        });
    }
    let theta_avg = average_form_over_circle(action, s.theta(), q)?;
    let beta = theta_avg.sub(s.theta())?;
    let integrator = Arc::new(PathIntegrator::new(beta));
    let (path_mismatch, _) = worst_over(samples, |p| {
        let a = integrator.radial_then_arc(p.coords());
        let b = integrator.arc_then_radial(p.coords());
        (a - b).abs() / (1.0 + a.abs())
    });
    if path_mismatch > tol {
        return Err(Error::Exactness {
            residual: path_mismatch,
        });
    }
    let f = primitive(integrator)?;
    // e^{-(-f)} ω has Lee form θ + df = θ_avg
    let stage1 = conformal_rescale(s, &f.scale(-1.0), samples, tol)?;
    let omega2 = average_form_over_circle(action, stage1.omega(), q)?;
    let structure = LckStructure::new(omega2, theta_avg.clone(), samples, tol)?;

    let x = action_field(action);
    let lie_o = lie_derivative(&x, structure.omega())?;
    let lie_t = lie_derivative(&x, structure.theta())?;
    let (lie_omega, _) = worst_over(samples, |p| lie_o.sup_norm_at(p));
    let (lie_theta, _) = worst_over(samples, |p| lie_t.sup_norm_at(p));

    let (monodromy_before, monodromy_after) = match samples.first() {
        Some(base) => (
            loop_integral(s.theta(), action, base, q, tol)?,
            loop_integral(structure.theta(), action, base, q, tol)?,
        ),
        None => (0.0, 0.0),
    };
    Ok(PipelineResult {
        structure,
        f,
        theta_avg,
        lie_omega,
        lie_theta,
        path_mismatch,
        monodromy_before,
        monodromy_after,
    })
}

/// Largest change of `∫θ` along `action` orbits through `bases`.
pub fn monodromy_drift(
    before: &KForm,
    after: &KForm,
    action: &CircleAction,
    bases: &[Point],
    q: &QuadratureRule,
    closed_tol: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in bases {
        let x = loop_integral(before, action, b, q, closed_tol)?;
        let y = loop_integral(after, action, b, q, closed_tol)?;
        worst = worst.max((x - y).abs());
    }
    Ok(worst)
}
