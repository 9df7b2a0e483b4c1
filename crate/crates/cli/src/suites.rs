//! The verification suites. Each one is independent: it builds what it
//! needs from the config and returns residuals, or an error that the
//! runner records.

use std::f64::consts::PI;

use serde_json::{json, Map, Value};

use lckit::flows::{flow_pullback_form, loop_integral, QuadratureRule};
use lckit::form::{ddc, exterior_d, lie_derivative, KForm, ScalarField};
use lckit::hopf::{hopf_lck_structure, hopf_lee_form, killing_rates, HomothetyField, HopfModel};
use lckit::lck::{extract_lee_form, is_vaisman, sup_diff, vaisman_potential, LckStructure};
use lckit::potential::{
    averaging_pipeline, build_omega_w_circle, build_psi_potential, certify_potential, convolve, monodromy_drift,
    psi, psi_derivative, verify_key_formula, verify_proof_chain, Window,
};
use lckit::sampling::sample_points;
use lckit::{conventions, Error, HermitianMetric, Point};

use crate::config::{ActionKind, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    ValidateLck,
    LeeForm,
    Monodromy,
    KeyFormula,
    ProofChain,
    AveragingPipeline,
    OmegaW,
    PsiPotential,
    Certify,
    Vaisman,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::ValidateLck,
        Suite::LeeForm,
        Suite::Monodromy,
        Suite::KeyFormula,
        Suite::ProofChain,
        Suite::AveragingPipeline,
        Suite::OmegaW,
        Suite::PsiPotential,
        Suite::Certify,
        Suite::Vaisman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ValidateLck => "validate-lck",
            Suite::LeeForm => "lee-form",
            Suite::Monodromy => "monodromy",
            Suite::KeyFormula => "key-formula",
            Suite::ProofChain => "proof-chain",
            Suite::AveragingPipeline => "averaging-pipeline",
            Suite::OmegaW => "omega-W",
            Suite::PsiPotential => "psi-potential",
            Suite::Certify => "certify",
            Suite::Vaisman => "vaisman",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// The identity the suite checks, written as a formula.
    pub fn anchor(self) -> &'static str {
        match self {
            Suite::ValidateLck => "d omega = theta ^ omega, d theta = 0, omega > 0, I omega = omega",
            Suite::LeeForm => "theta = -d log |z|^2 on the classical Hopf covering",
            Suite::Monodromy => "int_S theta along circle orbits",
            Suite::KeyFormula => "dd^c |A|^2 = lambda^2 w + Lie_{A^c}^2 w",
            Suite::ProofChain => "Lie_A w = d eta, Lie_A eta = eta, d^c eta^c = w, Lie_{A^c} w = d eta^c",
            Suite::AveragingPipeline => "S^1-averaged LCK metric conformal to the original",
            Suite::OmegaW => "w_W = int_0^{2 pi / lambda} e^{t A^c} w dt",
            Suite::PsiPotential => "w_psi = int psi(t) e^{t A^c / lambda} w dt, psi = 1 + cos t",
            Suite::Certify => "dd^c |A|^2_psi = w_W, automorphic and positive",
            Suite::Vaisman => "nabla theta = 0",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::ValidateLck => "LCK axioms for the model's standard structure",
            Suite::LeeForm => "Lee-form extraction against the closed form",
            Suite::Monodromy => "loop integrals of theta along deck and rotation orbits",
            Suite::KeyFormula => "both sides of the homothety identity on random vector pairs",
            Suite::ProofChain => "intermediate identities with lambda normalized to 1",
            Suite::AveragingPipeline => "two-stage averaging of a perturbed Hopf structure",
            Suite::OmegaW => "circle integral: closedness, positivity, convergence, automorphy",
            Suite::PsiPotential => "psi weight identities and the derivative of w_psi",
            Suite::Certify => "automorphic potential certificate",
            Suite::Vaisman => "parallel Lee form and the Vaisman potential",
        }
    }
}

/// What a suite measured.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub residual_max: f64,
    pub passed: bool,
    pub details: Map<String, Value>,
}

impl Outcome {
    fn new(residual_max: f64, passed: bool, details: Value) -> Self {
        let details = match details {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Self {
            residual_max,
            passed,
            details,
        }
    }
}

/// Shared inputs, built once per run.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub samples: Vec<Point>,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        let samples = sample_points(config.model.n, config.samples, config.seed);
        Self { config, samples }
    }

    fn model(&self) -> lckit::Result<HopfModel> {
        self.config.build_model()
    }

    fn quadrature(&self) -> lckit::Result<QuadratureRule> {
        QuadratureRule::new(self.config.quadrature.n)
    }

    fn tol_jet(&self) -> f64 {
        self.config.tolerances.jet
    }

    fn tol_quad(&self) -> f64 {
        self.config.tolerances.quad
    }

    fn field(&self, model: &HopfModel) -> lckit::Result<HomothetyField> {
        let f = &self.config.field;
        let k = (!f.killing_rates.is_empty()).then(|| killing_rates(&f.killing_rates));
        model.homothety_field(f.lambda, k.as_ref())
    }

    fn kahler(&self, model: &HopfModel) -> lckit::Result<KForm> {
        model
            .catalog()
            .map(|c| c.kahler.clone())
            .ok_or_else(|| Error::Precondition("model has no flat Kahler catalog (not a similarity)".into()))
    }

    fn hopf(&self, model: &HopfModel) -> lckit::Result<LckStructure> {
        let c = model
            .catalog()
            .ok_or_else(|| Error::Precondition("model has no flat Kahler catalog (not a similarity)".into()))?;
        Ok(c.lck.clone())
    }

    /// A few sample points for the expensive orbit computations.
    fn bases(&self, count: usize) -> &[Point] {
        &self.samples[..count.min(self.samples.len())]
    }
}

pub fn run_suite(suite: Suite, cx: &Context) -> lckit::Result<Outcome> {
    match suite {
        Suite::ValidateLck => validate_lck(cx),
        Suite::LeeForm => lee_form(cx),
        Suite::Monodromy => monodromy(cx),
        Suite::KeyFormula => key_formula(cx),
        Suite::ProofChain => proof_chain(cx),
        Suite::AveragingPipeline => pipeline(cx),
        Suite::OmegaW => omega_w(cx),
        Suite::PsiPotential => psi_potential(cx),
        Suite::Certify => certify(cx),
        Suite::Vaisman => vaisman(cx),
    }
}

fn validate_lck(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let s = cx.hopf(&model)?;
    let r = s.validate(&cx.samples, cx.tol_jet())?;
    let worst = r.defining.max(r.closedness).max(r.i_invariance);
    Ok(Outcome::new(
        worst,
        worst <= cx.tol_jet() && r.min_eigenvalue > 0.0,
        json!({
            "defining": r.defining,
            "closedness": r.closedness,
            "i_invariance": r.i_invariance,
            "min_eigenvalue": r.min_eigenvalue,
            "samples": r.samples,
        }),
    ))
}

fn lee_form(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let s = cx.hopf(&model)?;
    let lee = extract_lee_form(s.omega(), &cx.samples, cx.tol_jet())?;
    let expected = hopf_lee_form(cx.config.model.n);
    let diff = cx
        .samples
        .iter()
        .map(|p| sup_diff(&lee.theta.coefficients(p), &expected.coefficients(p)))
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        diff.max(lee.closedness),
        diff <= cx.tol_jet() && lee.closedness <= cx.tol_jet(),
        json!({
            "theta_vs_closed_form": diff,
            "defining": lee.residual,
            "d_theta": lee.closedness,
        }),
    ))
}

fn monodromy(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let q = cx.quadrature()?;
    let theta = hopf_lee_form(cx.config.model.n);
    let chi = model.character().map(|c| c.generator());
    let mut worst: f64 = 0.0;
    let mut entries = Vec::new();
    for kind in &cx.config.monodromy.actions {
        let (action, expected) = match kind {
            ActionKind::Deck => {
                let chi = chi.ok_or_else(|| Error::Precondition("deck monodromy needs a weight character".into()))?;
                (model.deck_circle_action()?, -chi.ln())
            }
            ActionKind::Rotation => (model.rotation_action(), 0.0),
        };
        let mut values = Vec::new();
        for base in cx.bases(4) {
            let v = loop_integral(&theta, &action, base, &q, cx.tol_jet())?;
            worst = worst.max((v - expected).abs());
            values.push(v);
        }
        entries.push(json!({
            "action": match kind { ActionKind::Deck => "deck", ActionKind::Rotation => "rotation" },
            "value": values[0],
            "expected": expected,
            "values": values,
        }));
    }
    Ok(Outcome::new(worst, worst <= cx.tol_jet(), json!({ "orbits": entries })))
}

fn key_formula(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let w = cx.kahler(&model)?;
    let a = cx.field(&model)?;
    let r = verify_key_formula(&a, &w, &cx.samples, 20, cx.config.seed)?;
    let mut worst = r.residual.max(r.coefficient_residual);
    let mut homogeneity = Vec::new();
    for c in [0.5, 2.0] {
        let scaled = a.scaled(c, &w)?;
        let rc = verify_key_formula(&scaled, &w, &cx.samples, 20, cx.config.seed)?;
        worst = worst.max(rc.residual);
        homogeneity.push(json!({ "c": c, "residual": rc.residual }));
    }
    Ok(Outcome::new(
        worst,
        worst <= cx.tol_jet(),
        json!({
            "residual": r.residual,
            "coefficient_residual": r.coefficient_residual,
            "lie2_norm": r.lie2_norm,
            "lhs_norm": r.lhs_norm,
            "pairs_per_point": r.pairs_per_point,
            "homogeneity": homogeneity,
        }),
    ))
}

fn proof_chain(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let w = cx.kahler(&model)?;
    let a = cx.field(&model)?;
    let lines = verify_proof_chain(&a, &w, &cx.samples)?;
    let worst = lines.iter().map(|l| l.residual).fold(0.0, f64::max);
    let items: Vec<Value> = lines
        .iter()
        .map(|l| json!({ "identity": l.name, "residual": l.residual, "pass": l.residual <= cx.tol_jet() }))
        .collect();
    Ok(Outcome::new(worst, worst <= cx.tol_jet(), json!({ "lines": items })))
}

/// `e^{ε h} ω` with `h = x₁/|z|`, and its Lee form `θ + ε dh`.
pub fn perturbed_hopf(n: usize, eps: f64, samples: &[Point], tol: f64) -> lckit::Result<LckStructure> {
    let base = hopf_lck_structure(n)?;
    let h = ScalarField::from_fn(n, |x| {
        let r2 = x.iter().fold(x[0].scale(0.0), |acc, xi| acc + xi * xi);
        &x[0] * &r2.powf(-0.5)
    });
    let omega = base.omega().mul_scalar(&h.scale(eps).map(|j| j.exp()))?;
    let theta = base.theta().combine(1.0, &exterior_d(h.as_form())?, eps)?;
    LckStructure::new(omega, theta, samples, tol)
}

fn pipeline(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    cx.hopf(&model)?;
    let spec = &cx.config.pipeline;
    let samples = cx.bases(spec.samples);
    let s = perturbed_hopf(cx.config.model.n, spec.epsilon, samples, cx.tol_jet())?;
    let q = QuadratureRule::new(spec.quadrature_n)?;
    let out = averaging_pipeline(&s, &model.rotation_action(), &q, samples, cx.tol_jet())?;
    let bases = &samples[..samples.len().min(3)];
    let rotation_drift =
        monodromy_drift(s.theta(), out.structure.theta(), &model.rotation_action(), bases, &q, cx.tol_jet())?;
    let deck_drift = match model.deck_circle_action() {
        Ok(deck) => Some(monodromy_drift(s.theta(), out.structure.theta(), &deck, bases, &q, cx.tol_jet())?),
        Err(Error::Branch(_)) => None,
        Err(e) => return Err(e),
    };
    let r = out.structure.residuals();
    let drift = rotation_drift.max(deck_drift.unwrap_or(0.0));
    let invariance = out.lie_omega.max(out.lie_theta);
    let passed = invariance <= cx.tol_quad() && drift <= cx.tol_jet() && r.defining <= cx.tol_jet();
    Ok(Outcome::new(
        invariance.max(drift).max(r.defining),
        passed,
        json!({
            "epsilon": spec.epsilon,
            "lie_x_omega": out.lie_omega,
            "lie_x_theta": out.lie_theta,
            "path_mismatch": out.path_mismatch,
            "defining": r.defining,
            "closedness": r.closedness,
            "monodromy_drift_rotation": rotation_drift,
            "monodromy_drift_deck": deck_drift,
            "samples": samples.len(),
        }),
    ))
}

fn omega_w(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let w = cx.kahler(&model)?;
    let a = cx.field(&model)?;
    let q = cx.quadrature()?;
    let ww = build_omega_w_circle(&a, &w, &q, Window::Centered, &cx.samples)?;
    let fine = build_omega_w_circle(&a, &w, &QuadratureRule::new(2 * q.n)?, Window::Centered, &cx.samples)?;
    let d = exterior_d(&ww)?;
    let metric = HermitianMetric::new(ww.clone());
    let (mut closed, mut conv, mut min_eig): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for p in &cx.samples {
        closed = closed.max(d.sup_norm_at(p));
        conv = conv.max(sup_diff(&ww.coefficients(p), &fine.coefficients(p)));
        min_eig = min_eig.min(metric.min_eigenvalue(p));
    }
    let automorphy = match model.character() {
        Some(chi) => lckit::lck::check_automorphy(&ww, model.contraction(), chi.generator(), &cx.samples)?,
        None => f64::NAN,
    };
    let periodic = match build_omega_w_circle(&a, &w, &q, Window::Periodic, &cx.samples) {
        Ok(p) => Value::from(
            cx.samples
                .iter()
                .map(|x| sup_diff(&p.coefficients(x), &ww.coefficients(x)))
                .fold(0.0, f64::max),
        ),
        Err(Error::Periodicity { residual }) => json!({ "not_periodic": residual }),
        Err(e) => return Err(e),
    };
    let worst = closed.max(conv).max(automorphy);
    Ok(Outcome::new(
        worst,
        closed <= cx.tol_quad() && conv <= cx.tol_quad() && automorphy <= cx.tol_jet() && min_eig > 0.0,
        json!({
            "closedness": closed,
            "doubling_change": conv,
            "min_eigenvalue": min_eig,
            "automorphy": automorphy,
            "periodic_window_vs_centered": periodic,
        }),
    ))
}

fn psi_potential(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let w = cx.kahler(&model)?;
    let a = cx.field(&model)?;
    let q = cx.quadrature()?;
    let mass = (q.integrate(-PI, PI, psi) - 2.0 * PI).abs();
    let weight = (0..101)
        .map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / 101.0)
        .map(|s| (psi(s) + psi_derivative(s, 2) - 1.0).abs())
        .fold(0.0, f64::max);
    let (_, omega_psi) = build_psi_potential(&a, &w, &q)?;
    let omega_dpsi = convolve(&a, &w, &q, |s| psi_derivative(s, 1))?;
    let lie = lie_derivative(&a.companion().scale(1.0 / a.lambda()), &omega_psi)?;
    let h = 1e-4;
    let flow = a.companion_flow();
    let fd = flow_pullback_form(&flow, h / a.lambda(), &omega_psi)?
        .sub(&flow_pullback_form(&flow, -h / a.lambda(), &omega_psi)?)?
        .scale(1.0 / (2.0 * h));
    let pts = cx.bases(10);
    let (mut fd_gap, mut weight_gap, mut scale): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in pts {
        let l = lie.coefficients(p);
        fd_gap = fd_gap.max(sup_diff(&l, &fd.coefficients(p)) / (1.0 + sup_abs(&l)));
        weight_gap = weight_gap.max(sup_diff(&l, &omega_dpsi.scale(conventions::PSI_LIE_SIGN).coefficients(p)));
        scale = scale.max(sup_abs(&l));
    }
    let worst = mass.max(weight).max(fd_gap);
    Ok(Outcome::new(
        worst,
        mass <= 1e-10 && weight <= 1e-12 && fd_gap <= cx.tol_quad(),
        json!({
            "mass_error": mass,
            "psi_plus_psi2_minus_one": weight,
            "lie_vs_parameter_difference": fd_gap,
            "lie_vs_psi_prime_convolution": weight_gap,
            "lie_norm": scale,
        }),
    ))
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn certify(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let w = cx.kahler(&model)?;
    let a = cx.field(&model)?;
    let q = cx.quadrature()?;
    let chi = model
        .character()
        .ok_or_else(|| Error::Precondition("certification needs a weight character".into()))?
        .generator();
    let cert = certify_potential(&a, &w, &q, &cx.samples, model.contraction(), chi, cx.tol_quad(), cx.tol_jet())?;
    Ok(Outcome::new(
        cert.residual_exactness,
        cert.is_valid(),
        json!({
            "residual_exactness": cert.residual_exactness,
            "min_positivity_eigenvalue": cert.min_positivity_eigenvalue,
            "automorphy_residual": cert.automorphy_residual,
            "quadrature_n": cert.quadrature.n,
            "samples": cert.samples,
            "failing_legs": cert.failing_legs(),
        }),
    ))
}

fn vaisman(cx: &Context) -> lckit::Result<Outcome> {
    let model = cx.model()?;
    let s = cx.hopf(&model)?;
    let w = cx.kahler(&model)?;
    let r = is_vaisman(&s, &cx.samples, cx.tol_quad())?;
    let phi = vaisman_potential(&s, &w, s.theta(), &cx.samples, cx.tol_quad())?;
    let dd = ddc(&phi)?;
    let target = w.scale(conventions::HOPF_VAISMAN_DDC);
    let potential = cx
        .samples
        .iter()
        .map(|p| sup_diff(&dd.coefficients(p), &target.coefficients(p)))
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        r.nabla_theta.max(potential),
        r.vaisman && potential <= cx.tol_jet(),
        json!({
            "nabla_theta": r.nabla_theta,
            "levi_civita": r.levi_civita,
            "ddc_potential_vs_16w": potential,
        }),
    ))
}
