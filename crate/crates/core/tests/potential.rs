mod common;

use std::f64::consts::PI;

use common::*;
use lckit::conventions::{PSI_LIE_SIGN, PSI_POTENTIAL_POWER};
use lckit::flows::{flow_pullback_form, pullback, CircleAction, QuadratureRule};
use lckit::form::{lie_derivative, Basis, KForm, ScalarField};
use lckit::hopf::*;
use lckit::lck::{check_automorphy, conformal_rescale, LckStructure};
use lckit::potential::*;
use lckit::sampling::{sample_points, sample_points_in};
use lckit::{Error, HermitianMetric, Point};
use num_complex::Complex64;

const ALPHA: f64 = 0.5;

fn model() -> HopfModel {
    make_classical_hopf(2, Complex64::new(ALPHA, 0.0)).unwrap()
}

fn omega() -> KForm {
    flat_kahler_form(2)
}

fn euler() -> HomothetyField {
    model().homothety_field(2.0, None).unwrap()
}

fn distinct() -> HomothetyField {
    model().homothety_field(2.0, Some(&killing_rates(&[0.5, 0.2]))).unwrap()
}

fn points(count: usize) -> Vec<Point> {
    sample_points(2, count, 0xa11ce)
}

fn near(count: usize) -> Vec<Point> {
    sample_points_in(2, count, 0xbeef, 0.5, 2.0)
}

fn gap(a: &KForm, b: &KForm, samples: &[Point]) -> f64 {
    samples.iter().map(|p| close_coeffs(a, b, p)).fold(0.0, f64::max)
}

/// `dd^c f` by nested central differences: `d^c f = −I df` has components
/// `(g_{2m+1}, −g_{2m})` for `g = ∇f`.
fn fd_ddc(f: &ScalarField, p: &Point, h: f64) -> Vec<f64> {
    let dim = p.dim();
    let dc = |q: &Point| -> Vec<f64> {
        let g: Vec<f64> = (0..dim)
            .map(|i| (f.value(&shifted(q, i, h)) - f.value(&shifted(q, i, -h))) / (2.0 * h))
            .collect();
        (0..dim).map(|i| if i % 2 == 0 { g[i + 1] } else { -g[i - 1] }).collect()
    };
    let basis = Basis::get(dim, 2);
    let mut out = vec![0.0; basis.len()];
    for i in 0..dim {
        let der = fd_coeffs(dc, p, i, h);
        for (j, dj) in der.iter().enumerate() {
            if i == j {
                continue;
            }
            let (lo, hi, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            out[basis.index_of(&[lo, hi]).unwrap()] += s * dj;
        }
    }
    out
}

#[test]
fn key_formula_killing_case() {
    let a = euler();
    let w = omega();
    let samples = points(40);
    let r = verify_key_formula(&a, &w, &samples, 4, 1).unwrap();
    assert!(r.residual <= 1e-8 && r.coefficient_residual <= 1e-8, "{r:?}");
    assert!(r.lie2_norm <= 1e-12);
    // dd^c|A|^2 = 4 w for the Euler field
    let lhs = lckit::form::ddc(&square_length(&a, &w).unwrap()).unwrap();
    assert!(gap(&lhs, &w.scale(4.0), &samples) <= 1e-10);
    for p in &near(5) {
        let fd = fd_ddc(&square_length(&a, &w).unwrap(), p, 1e-3);
        assert!(sup(&fd.iter().zip(lhs.coefficients(p)).map(|(x, y)| x - y).collect::<Vec<_>>()) <= 1e-6);
    }
}

#[test]
fn key_formula_distinct_rates() {
    let a = distinct();
    let w = omega();
    let samples = points(40);
    let r = verify_key_formula(&a, &w, &samples, 4, 2).unwrap();
    assert!(r.residual <= 1e-8 && r.coefficient_residual <= 1e-8, "{r:?}");
    assert!(r.lie2_norm > 1e-2, "Lie^2 should not vanish: {}", r.lie2_norm);
    let len2 = square_length(&a, &w).unwrap();
    let lhs = lckit::form::ddc(&len2).unwrap();
    // not a multiple of w: the dx1^dy1 and dx2^dy2 coefficients differ
    let b = Basis::get(4, 2);
    let p = &samples[0];
    let c = lhs.coefficients(p);
    let (c1, c2) = (c[b.index_of(&[0, 1]).unwrap()], c[b.index_of(&[2, 3]).unwrap()]);
    assert!((c1 - c2).abs() > 1e-2, "{c1} {c2}");
    for p in &near(5) {
        let fd = fd_ddc(&len2, p, 1e-3);
        assert!(sup(&fd.iter().zip(lhs.coefficients(p)).map(|(x, y)| x - y).collect::<Vec<_>>()) <= 1e-6);
    }
}

#[test]
fn second_lie_derivative_matches_flow_differences() {
    let a = distinct();
    let w = omega();
    let lie2 = lie_derivative(a.companion(), &lie_derivative(a.companion(), &w).unwrap()).unwrap();
    let flow = a.companion_flow();
    let h = 1e-3;
    let plus = flow_pullback_form(&flow, h, &w).unwrap();
    let minus = flow_pullback_form(&flow, -h, &w).unwrap();
    let fd = plus.combine(1.0, &minus, 1.0).unwrap().combine(1.0, &w, -2.0).unwrap().scale(1.0 / (h * h));
    assert!(gap(&lie2, &fd, &near(10)) <= 1e-5);
}

#[test]
fn key_formula_homogeneity() {
    let w = omega();
    let samples = points(20);
    let base = distinct();
    let lhs = lckit::form::ddc(&square_length(&base, &w).unwrap()).unwrap();
    for c in [0.5, 2.0] {
        let a = base.scaled(c, &w).unwrap();
        assert!((a.lambda() - 2.0 * c).abs() < 1e-15);
        let r = verify_key_formula(&a, &w, &samples, 3, 3).unwrap();
        assert!(r.residual <= 1e-8, "c = {c}: {r:?}");
        let scaled = lckit::form::ddc(&square_length(&a, &w).unwrap()).unwrap();
        assert!(gap(&scaled, &lhs.scale(c * c), &samples) <= 1e-9);
    }
}

#[test]
fn key_formula_rejects_non_two_forms() {
    let a = euler();
    let err = verify_key_formula(&a, &hopf_lee_form(2), &points(2), 1, 0).unwrap_err();
    assert!(matches!(err, Error::Degree { .. }));
}

#[test]
fn key_formula_rhs_is_consistent() {
    let a = distinct();
    let w = omega();
    let lhs = lckit::form::ddc(&square_length(&a, &w).unwrap()).unwrap();
    assert!(gap(&lhs, &key_formula_rhs(&a, &w).unwrap(), &points(10)) <= 1e-8);
}

#[test]
fn proof_chain_lines_pass() {
    let w = omega();
    let samples = points(30);
    for a in [euler(), distinct(), model().homothety_field(3.0, Some(&killing_rates(&[1.0, -0.4]))).unwrap()] {
        let lines = verify_proof_chain(&a, &w, &samples).unwrap();
        assert_eq!(lines.len(), 9);
        for l in &lines {
            assert!(l.residual <= 1e-8, "{}: {}", l.name, l.residual);
        }
        let names: Vec<_> = lines.iter().map(|l| l.name).collect();
        assert!(names.contains(&"eta(A) = 0") && names.contains(&"d^c eta^c = w"));
    }
}

#[test]
fn psi_weight_identities() {
    let q = QuadratureRule::new(64).unwrap();
    assert!((q.integrate(-PI, PI, psi) - 2.0 * PI).abs() <= 1e-10);
    for k in 0..=40 {
        let s = -PI + 2.0 * PI * (k as f64 + 0.5) / 41.0;
        assert!((psi(s) + psi_derivative(s, 2) - 1.0).abs() <= 1e-15);
        assert!((psi_derivative(s, 1) + s.sin()).abs() <= 1e-15);
        assert_eq!(psi_derivative(s, 0), psi(s));
        // derivative by central differences
        let h = 1e-5;
        let fd = (psi(s + h) - psi(s - h)) / (2.0 * h);
        assert!((fd - psi_derivative(s, 1)).abs() <= 1e-8);
    }
    assert_eq!(psi(3.5), 0.0);
    assert_eq!(psi_derivative(-3.5, 1), 0.0);
    assert!(psi(PI).abs() < 1e-15 && psi_derivative(PI, 1).abs() < 1e-15);
}

#[test]
fn psi_convolution_lie_derivative() {
    let a = distinct();
    let w = omega();
    let samples = near(8);
    let x = a.companion().scale(1.0 / a.lambda());
    let mismatch = |n| {
        let q = QuadratureRule::new(n).unwrap();
        let (_, omega_psi) = build_psi_potential(&a, &w, &q).unwrap();
        let omega_dpsi = convolve(&a, &w, &q, |s| psi_derivative(s, 1)).unwrap();
        let lie = lie_derivative(&x, &omega_psi).unwrap();
        (gap(&lie, &omega_dpsi.scale(PSI_LIE_SIGN), &samples), gap(&lie, &omega_dpsi, &samples), lie, omega_psi)
    };
    let (e256, wrong_sign, lie, omega_psi) = mismatch(256);
    let (e512, _, _, _) = mismatch(512);
    assert!(e256 <= 1e-3 && wrong_sign > 1.0, "{e256} {wrong_sign}");
    // psi'' = 1 at the endpoints, so the psi' sum is second order
    let ratio = e256 / e512;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");

    // finite difference in the convolution parameter
    let flow = a.companion_flow();
    let h = 1e-4;
    let plus = flow_pullback_form(&flow, h / a.lambda(), &omega_psi).unwrap();
    let minus = flow_pullback_form(&flow, -h / a.lambda(), &omega_psi).unwrap();
    let fd = plus.sub(&minus).unwrap().scale(1.0 / (2.0 * h));
    assert!(gap(&lie, &fd, &samples) <= 1e-6);
}

#[test]
fn omega_w_killing_is_multiple_of_flat_form() {
    let a = euler();
    let w = omega();
    let q = QuadratureRule::new(32).unwrap();
    let samples = points(20);
    let expected = w.scale(2.0 * PI / a.lambda());
    for window in [Window::Centered, Window::Periodic] {
        let ww = build_omega_w_circle(&a, &w, &q, window, &samples).unwrap();
        assert!(gap(&ww, &expected, &samples) <= 1e-10, "{window:?}");
    }
}

#[test]
fn omega_w_distinct_rates() {
    let a = distinct();
    let w = omega();
    let q = QuadratureRule::new(128).unwrap();
    let samples = points(200);
    let ww = build_omega_w_circle(&a, &w, &q, Window::Centered, &samples).unwrap();
    let metric = HermitianMetric::new(ww.clone());
    let min = samples.iter().map(|p| metric.min_eigenvalue(p)).fold(f64::INFINITY, f64::min);
    assert!(min > 0.0, "{min}");
    let b = Basis::get(4, 2);
    let c = ww.coefficients(&samples[0]);
    let (c1, c2) = (c[b.index_of(&[0, 1]).unwrap()], c[b.index_of(&[2, 3]).unwrap()]);
    assert!((c1 / c2 - 1.0).abs() > 1e-2);
    // closed
    let d = lckit::form::exterior_d(&ww).unwrap();
    assert!(samples.iter().map(|p| d.sup_norm_at(p)).fold(0.0, f64::max) <= 1e-10);
    // the distinct-rate flow does not close up on the covering
    assert!(matches!(
        build_omega_w_circle(&a, &w, &q, Window::Periodic, &samples),
        Err(Error::Periodicity { .. })
    ));
}

#[test]
fn omega_w_quadrature_self_convergence() {
    let a = distinct();
    let w = omega();
    let samples = points(20);
    let coarse = build_omega_w_circle(&a, &w, &QuadratureRule::new(256).unwrap(), Window::Centered, &samples).unwrap();
    let fine = build_omega_w_circle(&a, &w, &QuadratureRule::new(512).unwrap(), Window::Centered, &samples).unwrap();
    assert!(gap(&coarse, &fine, &samples) <= 1e-8);
}

#[test]
fn deck_commutes_with_circle_average() {
    let m = model();
    let a = distinct();
    let w = omega();
    let q = QuadratureRule::new(64).unwrap();
    let samples = points(20);
    let ww = build_omega_w_circle(&a, &w, &q, Window::Centered, &samples).unwrap();
    let pulled_then_avg =
        build_omega_w_circle(&a, &pullback(m.contraction(), &w).unwrap(), &q, Window::Centered, &samples).unwrap();
    let avg_then_pulled = pullback(m.contraction(), &ww).unwrap();
    assert!(gap(&pulled_then_avg, &avg_then_pulled, &samples) <= 1e-10);
    let chi = m.character().unwrap().generator();
    assert!(check_automorphy(&ww, m.contraction(), chi, &samples).unwrap() <= 1e-10);
}

#[test]
fn certificate_killing_closed_form() {
    let m = model();
    let a = euler();
    let w = omega();
    let q = QuadratureRule::new(32).unwrap();
    let samples = points(50);
    let chi = m.character().unwrap().generator();
    let cert = certify_potential(&a, &w, &q, &samples, m.contraction(), chi, 1e-8, 1e-8).unwrap();
    assert!(cert.is_valid(), "{:?}", cert.failing_legs());
    assert!(cert.failing_legs().is_empty());
    // phi = lambda^-3 * 2 pi |z|^2 = (pi / 4) |z|^2 at lambda = 2
    assert_eq!(PSI_POTENTIAL_POWER, -3);
    for p in &samples {
        let expected = PI / 4.0 * p.norm_sq();
        assert!((cert.potential.value(p) - expected).abs() <= 1e-10 * (1.0 + expected));
    }
    assert!(gap(&cert.omega_w, &w.scale(PI), &samples) <= 1e-10);
    assert!((cert.min_positivity_eigenvalue - PI).abs() <= 1e-10);
    assert_eq!(cert.samples, 50);
    assert_eq!(cert.quadrature, q);
}

#[test]
fn certificate_distinct_rates_and_negative_control() {
    let m = model();
    let a = distinct();
    let w = omega();
    let samples = points(30);
    let chi = m.character().unwrap().generator();
    let cert = |n| {
        certify_potential(&a, &w, &QuadratureRule::new(n).unwrap(), &samples, m.contraction(), chi, 1e-6, 1e-8)
            .unwrap()
    };
    let good = cert(256);
    assert!(good.is_valid(), "{} {:?}", good.residual_exactness, good.failing_legs());
    assert!(good.residual_exactness <= 1e-6);
    assert!(good.min_positivity_eigenvalue > 0.0);
    // nonconstant distortion: the potential is not a multiple of |z|^2
    let ratios: Vec<f64> = samples.iter().map(|p| good.potential.value(p) / p.norm_sq()).collect();
    let spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 1e-2);

    let bad = cert(4);
    assert!(!bad.is_valid());
    assert_eq!(bad.failing_legs(), vec!["exactness"]);
    assert!(bad.residual_exactness > 1e-6);

    // fourth-order convergence from N = 32 to N = 256
    let mid = cert(32);
    let ratio = mid.residual_exactness / good.residual_exactness;
    assert!(ratio > 1000.0, "ratio {ratio}");
}

#[test]
fn certificate_flags_wrong_character() {
    let m = model();
    let a = euler();
    let cert = certify_potential(
        &a,
        &omega(),
        &QuadratureRule::new(32).unwrap(),
        &points(10),
        m.contraction(),
        0.5,
        1e-8,
        1e-8,
    )
    .unwrap();
    assert_eq!(cert.failing_legs(), vec!["automorphy"]);
}

fn perturbed(eps: f64) -> LckStructure {
    let base = hopf_lck_structure(2).unwrap();
    let h = ScalarField::from_fn(2, |x| {
        let r2 = x.iter().fold(x[0].scale(0.0), |acc, xi| acc + xi * xi);
        &x[0] * &r2.powf(-0.5)
    });
    // e^{eps h} w has Lee form theta + eps dh
    let omega = base.omega().mul_scalar(&h.scale(eps).map(|j| j.exp())).unwrap();
    let theta = base.theta().combine(1.0, &lckit::form::exterior_d(h.as_form()).unwrap(), eps).unwrap();
    let s = LckStructure::new(omega, theta, &points(8), 1e-8).unwrap();
    let rescaled = conformal_rescale(&base, &h.scale(-eps), &points(4), 1e-8).unwrap();
    assert!(gap(rescaled.theta(), s.theta(), &points(4)) <= 1e-9);
    s
}

fn lie_sup(action: &CircleAction, a: &KForm, samples: &[Point]) -> f64 {
    let x = lckit::form::VectorField::from_matrix(action.flow().generator().rows());
    let l = lie_derivative(&x, a).unwrap();
    samples.iter().map(|p| l.sup_norm_at(p)).fold(0.0, f64::max)
}

#[test]
fn pipeline_fixes_invariant_input() {
    let s = hopf_lck_structure(2).unwrap();
    let action = CircleAction::rotation(2);
    let samples = points(6);
    let q = QuadratureRule::new(16).unwrap();
    let out = averaging_pipeline(&s, &action, &q, &samples, 1e-8).unwrap();
    assert!(gap(out.structure.omega(), s.omega(), &samples) <= 1e-10);
    assert!(gap(out.structure.theta(), s.theta(), &samples) <= 1e-10);
    assert!(samples.iter().all(|p| out.f.value(p).abs() <= 1e-10));
}

#[test]
fn pipeline_on_perturbed_hopf() {
    let s = perturbed(0.1);
    let action = CircleAction::rotation(2);
    let samples = points(6);
    assert!(lie_sup(&action, s.omega(), &samples) > 1e-3);
    assert!(lie_sup(&action, s.theta(), &samples) > 1e-3);
    let q = QuadratureRule::new(32).unwrap();
    let out = averaging_pipeline(&s, &action, &q, &samples, 1e-8).unwrap();
    assert!(out.lie_omega <= 1e-6 && out.lie_theta <= 1e-6, "{} {}", out.lie_omega, out.lie_theta);
    assert!(out.path_mismatch <= 1e-8);
    assert!(out.structure.residuals().defining <= 1e-8);
    assert!(out.structure.residuals().closedness <= 1e-8);
    assert!((out.monodromy_before - out.monodromy_after).abs() <= 1e-8);
    assert!(out.monodromy_after.abs() <= 1e-10);
    // df = theta_avg - theta
    let df = lckit::form::exterior_d(out.f.as_form()).unwrap();
    let beta = out.theta_avg.sub(s.theta()).unwrap();
    assert!(gap(&df, &beta, &samples) <= 1e-12);

    // deck-direction monodromy 2c, unchanged
    let deck = model().deck_circle_action().unwrap();
    let drift = monodromy_drift(s.theta(), out.structure.theta(), &deck, &samples[..3], &q, 1e-8).unwrap();
    assert!(drift <= 1e-8, "{drift}");
    let value = lckit::flows::loop_integral(out.structure.theta(), &deck, &samples[0], &q, 1e-8).unwrap();
    assert!((value - 2.0 * (1.0 / ALPHA).ln()).abs() <= 1e-8, "{value}");
}

#[test]
fn pipeline_rejects_inexact_correction() {
    let base = hopf_lck_structure(2).unwrap();
    // x2 dx1 is not closed, so its orbit average minus itself has no potential
    let bad = KForm::from_fn(2, 1, |x| {
        let z = x[0].scale(0.0);
        vec![x[2].scale(0.3), z.clone(), z.clone(), z]
    });
    let theta = base.theta().add(&bad).unwrap();
    let s = LckStructure::from_parts(base.omega().clone(), theta).unwrap();
    let err = averaging_pipeline(&s, &CircleAction::rotation(2), &QuadratureRule::new(16).unwrap(), &points(4), 1e-8)
        .unwrap_err();
    assert!(matches!(err, Error::Exactness { .. }), "{err:?}");
}

#[test]
fn pipeline_dimension_mismatch() {
    let s = hopf_lck_structure(2).unwrap();
    let err = averaging_pipeline(&s, &CircleAction::rotation(3), &QuadratureRule::new(8).unwrap(), &points(2), 1e-8)
        .unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}
