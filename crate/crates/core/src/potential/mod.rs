//! The key formula `dd^c|A|² = λ²ω̃ + Lie²_{A^c} ω̃`, the circle integral
//! `ω_W`, the ψ-weighted potential and the certificate tying them together.

mod pipeline;

pub use pipeline::{averaging_pipeline, monodromy_drift, PipelineResult, PATH_NODES};

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conventions;
use crate::error::{Error, Result};
use crate::flows::{pullback, pullback_scalar, weighted_flow_sum, LinearMap, QuadratureRule, Scheme};
use crate::form::{d_c, ddc, exterior_d, interior_product, lie_derivative, KForm, Point, ScalarField};
use crate::hopf::HomothetyField;
use crate::lck::{check_automorphy, sup_diff, HermitianMetric};
use crate::sampling::{gaussian_vector, worst_over};

/// `|A|² = g(A, A) = ω(A^c, A)`.
pub fn square_length(a: &HomothetyField, omega: &KForm) -> Result<ScalarField> {
    let inner = interior_product(a.companion(), omega)?;
    ScalarField::from_form(interior_product(a.field(), &inner)?)
}

/// `λ² ω + Lie_{A^c}(Lie_{A^c} ω)`.
pub fn key_formula_rhs(a: &HomothetyField, omega: &KForm) -> Result<KForm> {
    let lie2 = lie_derivative(a.companion(), &lie_derivative(a.companion(), omega)?)?;
    omega.combine(a.lambda() * a.lambda(), &lie2, 1.0)
}

#[derive(Clone, Debug)]
pub struct KeyFormulaReport {
    /// Sup over samples and vector pairs of `|LHS(u, v) − RHS(u, v)|`.
    pub residual: f64,
    /// Sup of the coefficient difference.
    pub coefficient_residual: f64,
    /// Sup of `‖Lie²_{A^c} ω‖∞`, zero exactly when `A^c` is Killing.
    pub lie2_norm: f64,
    pub lhs_norm: f64,
    pub samples: usize,
    pub pairs_per_point: usize,
}

/// Both sides of the key formula evaluated independently on `samples` and on
/// `pairs` random vector pairs per point (seeded by `seed`).
pub fn verify_key_formula(
    a: &HomothetyField,
    omega: &KForm,
    samples: &[Point],
    pairs: usize,
    seed: u64,
) -> Result<KeyFormulaReport> {
    if omega.degree() != 2 {
        return Err(Error::Degree {
            op: "verify_key_formula",
            degree: omega.degree(),
            reason: "expected a 2-form",
        });
    }
    let lhs = ddc(&square_length(a, omega)?)?;
    let lie2 = lie_derivative(a.companion(), &lie_derivative(a.companion(), omega)?)?;
    let rhs = omega.combine(a.lambda() * a.lambda(), &lie2, 1.0)?;
    let dim = omega.dim();
    let per_point: Vec<Vec<(Vec<f64>, Vec<f64>)>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        samples
            .iter()
            .map(|_| (0..pairs).map(|_| (gaussian_vector(&mut rng, dim), gaussian_vector(&mut rng, dim))).collect())
            .collect()
    };
    let residual = samples
        .iter()
        .zip(&per_point)
        .flat_map(|(p, pairs)| {
            pairs.iter().map(|(u, v)| {
                let x = lhs.evaluate(p, &[u, v]);
                let y = rhs.evaluate(p, &[u, v]);
                (x - y).abs()
            })
        })
        .fold(0.0, |m: f64, r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
    let (coefficient_residual, _) = worst_over(samples, |p| sup_diff(&lhs.coefficients(p), &rhs.coefficients(p)));
    let (lie2_norm, _) = worst_over(samples, |p| lie2.sup_norm_at(p));
    let (lhs_norm, _) = worst_over(samples, |p| lhs.sup_norm_at(p));
    Ok(KeyFormulaReport {
        residual,
        coefficient_residual,
        lie2_norm,
        lhs_norm,
        samples: samples.len(),
        pairs_per_point: pairs,
    })
}

/// One identity of the proof chain with its sup residual.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityLine {
    pub name: &'static str,
    pub residual: f64,
}

/// Residuals of the intermediate identities, with `A` rescaled to `λ = 1`.
pub fn verify_proof_chain(a: &HomothetyField, omega: &KForm, samples: &[Point]) -> Result<Vec<IdentityLine>> {
    let a = a.scaled(1.0 / a.lambda(), omega)?;
    let (x, xc) = (a.field(), a.companion());
    let eta = interior_product(x, omega)?;
    let eta_c = interior_product(xc, omega)?;
    let d_eta = exterior_d(&eta)?;
    let lie_omega = lie_derivative(x, omega)?;
    let eta_of_a = ScalarField::from_form(interior_product(x, &eta)?)?;
    let lie_eta = lie_derivative(x, &eta)?;
    let lie_eta_c = lie_derivative(x, &eta_c)?;
    let dc_eta_c = d_c(&eta_c)?;
    let lie_c_omega = lie_derivative(xc, omega)?;
    let d_eta_c = exterior_d(&eta_c)?;
    let contraction = ScalarField::from_form(interior_product(x, &eta_c)?)?;
    let len2 = square_length(&a, omega)?;
    let lie2 = lie_derivative(xc, &lie_c_omega)?;
    let dc_contracted = d_c(&interior_product(x, &d_eta_c)?)?;

    let diff = |l: &KForm, r: &KForm| worst_over(samples, |p| sup_diff(&l.coefficients(p), &r.coefficients(p))).0;
    Ok(vec![
        IdentityLine {
            name: "Lie_A w = d(i_A w)",
            residual: diff(&lie_omega, &d_eta),
        },
        IdentityLine {
            name: "d eta = w",
            residual: diff(&d_eta, omega),
        },
        IdentityLine {
            name: "eta(A) = 0",
            residual: worst_over(samples, |p| eta_of_a.value(p).abs()).0,
        },
        IdentityLine {
            name: "Lie_A eta = eta",
            residual: diff(&lie_eta, &eta),
        },
        IdentityLine {
            name: "Lie_A eta^c = eta^c",
            residual: diff(&lie_eta_c, &eta_c),
        },
        IdentityLine {
            name: "i_A eta^c = |A|^2",
            residual: worst_over(samples, |p| {
                (contraction.value(p) - conventions::CONTRACTION_ETA_C_SIGN * len2.value(p)).abs()
            })
            .0,
        },
        IdentityLine {
            name: "d^c eta^c = w",
            residual: diff(&dc_eta_c, omega),
        },
        IdentityLine {
            name: "Lie_{A^c} w = d eta^c",
            residual: diff(&lie_c_omega, &d_eta_c),
        },
        IdentityLine {
            name: "d^c(i_A d eta^c) = -Lie_{A^c}^2 w",
            residual: diff(&dc_contracted, &lie2.scale(-1.0)),
        },
    ])
}

/// Integration window for `ω_W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// `[−π/λ, π/λ]`, composite Simpson; needs no periodicity.
    Centered,
    /// `[0, 2π/λ]`, periodic trapezoid; the integrand must close up.
    Periodic,
}

/// Relative tolerance for `Φ_T^* ω = ω` in the periodic window.
pub const PERIODICITY_TOL: f64 = 1e-10;

/// `ω_W = ∫ Φ_t^* ω dt` over a window of length `2π/λ` along the flow of `A^c`,
/// un-normalized.
pub fn build_omega_w_circle(
    a: &HomothetyField,
    omega: &KForm,
    q: &QuadratureRule,
    window: Window,
    samples: &[Point],
) -> Result<KForm> {
    let flow = a.companion_flow();
    let half = PI / a.lambda();
    match window {
        Window::Centered => {
            let rule = QuadratureRule::with_scheme(q.n + q.n % 2, Scheme::Simpson)?;
            weighted_flow_sum(&flow, &rule.nodes(-half, half), omega)
        }
        Window::Periodic => {
            let end = pullback(&flow.at(2.0 * half), omega)?;
            let (residual, _) = worst_over(samples, |p| {
                let scale = 1.0 + omega.sup_norm_at(p);
                sup_diff(&end.coefficients(p), &omega.coefficients(p)) / scale
            });
            if residual > PERIODICITY_TOL {
                return Err(Error::Periodicity { residual });
            }
            let rule = QuadratureRule::new(q.n)?;
            weighted_flow_sum(&flow, &rule.nodes(0.0, 2.0 * half), omega)
        }
    }
}

/// `ψ(s) = 1 + cos s` on `[−π, π]`, zero outside.
pub fn psi(s: f64) -> f64 {
    if s.abs() <= PI {
        1.0 + s.cos()
    } else {
        0.0
    }
}

/// `ψ^{(k)}(s)` on `(−π, π)`, zero outside.
pub fn psi_derivative(s: f64, k: usize) -> f64 {
    if s.abs() > PI {
        return 0.0;
    }
    match k % 4 {
        0 => psi(s) - if k == 0 { 0.0 } else { 1.0 },
        1 => -s.sin(),
        2 => -s.cos(),
        _ => s.sin(),
    }
}

/// `ω_w = ∫_{−π}^{π} w(s) Φ_{s/λ}^* ω ds` along the `A^c` flow, trapezoid with `q.n` nodes.
pub fn convolve(a: &HomothetyField, omega: &KForm, q: &QuadratureRule, weight: impl Fn(f64) -> f64) -> Result<KForm> {
    let lambda = a.lambda();
    let rule = QuadratureRule::new(q.n)?;
    let nodes: Vec<(f64, f64)> = rule
        .nodes(-PI, PI)
        .into_iter()
        .map(|(s, h)| (s / lambda, h * weight(s)))
        .collect();
    weighted_flow_sum(&a.companion_flow(), &nodes, omega)
}

/// `(|A|²_ψ, ω_ψ)`: the square length of `A` for the ψ-convolved form.
pub fn build_psi_potential(a: &HomothetyField, omega: &KForm, q: &QuadratureRule) -> Result<(ScalarField, KForm)> {
    let omega_psi = convolve(a, omega, q, psi)?;
    Ok((square_length(a, &omega_psi)?, omega_psi))
}

/// Constructive witness that `ω_W` is `dd^c` of an automorphic function.
#[derive(Clone, Debug)]
pub struct PotentialCertificate {
    pub omega_w: KForm,
    pub potential: ScalarField,
    pub residual_exactness: f64,
    pub min_positivity_eigenvalue: f64,
    pub automorphy_residual: f64,
    pub quadrature: QuadratureRule,
    pub samples: usize,
    pub tolerance_exactness: f64,
    pub tolerance_automorphy: f64,
}

/// Positivity floor for a certificate.
pub const CERT_POSITIVITY_FLOOR: f64 = 1e-10;

impl PotentialCertificate {
    pub fn exactness_ok(&self) -> bool {
        self.residual_exactness <= self.tolerance_exactness
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_positivity_eigenvalue > CERT_POSITIVITY_FLOOR
    }

    pub fn automorphy_ok(&self) -> bool {
        self.automorphy_residual <= self.tolerance_automorphy
    }

    pub fn is_valid(&self) -> bool {
        self.exactness_ok() && self.positivity_ok() && self.automorphy_ok()
    }

    /// Names of the legs that fail.
    pub fn failing_legs(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.exactness_ok() {
            out.push("exactness");
        }
        if !self.positivity_ok() {
            out.push("positivity");
        }
        if !self.automorphy_ok() {
            out.push("automorphy");
        }
        out
    }
}

/// Build `ω_W` (centered window), `φ = λ^{-3} |A|²_ψ`, and measure
/// `‖dd^cφ − ω_W‖∞`, the positivity of `ω_W` and the automorphy of both
/// under `deck` with character `chi`.
#[allow(clippy::too_many_arguments)]
pub fn certify_potential(
    a: &HomothetyField,
    omega: &KForm,
    q: &QuadratureRule,
    samples: &[Point],
    deck: &LinearMap,
    chi: f64,
    tol_exactness: f64,
    tol_automorphy: f64,
) -> Result<PotentialCertificate> {
    let omega_w = build_omega_w_circle(a, omega, q, Window::Centered, samples)?;
    let (len2_psi, _) = build_psi_potential(a, omega, q)?;
    let potential = len2_psi.scale(a.lambda().powi(conventions::PSI_POTENTIAL_POWER));
    let dd = ddc(&potential)?;
    let (residual_exactness, _) = worst_over(samples, |p| sup_diff(&dd.coefficients(p), &omega_w.coefficients(p)));
    let metric = HermitianMetric::new(omega_w.clone());
    let min_eig = samples
        .iter()
        .map(|p| metric.min_eigenvalue(p))
        .fold(f64::INFINITY, f64::min);
    let form_aut = check_automorphy(&omega_w, deck, chi, samples)?;
    let pulled = pullback_scalar(deck, &potential)?;
    let (scalar_aut, _) = worst_over(samples, |p| (pulled.value(p) - chi * potential.value(p)).abs());
    Ok(PotentialCertificate {
        omega_w,
        potential,
        residual_exactness,
        min_positivity_eigenvalue: if samples.is_empty() { f64::NAN } else { min_eig },
        automorphy_residual: form_aut.max(scalar_aut),
        quadrature: *q,
        samples: samples.len(),
        tolerance_exactness: tol_exactness,
        tolerance_automorphy: tol_automorphy,
    })
}
