mod common;

use common::*;
use lckit::conventions;
use lckit::flows::{pullback, CircleAction, LinearMap};
use lckit::form::*;
use lckit::hopf::{flat_kahler_form, hopf_lck_form, hopf_lee_form, norm_squared};
use lckit::lck::*;
use lckit::sampling::sample_points;
use lckit::{Error, Jet};
use num_complex::Complex64;

const TOL: f64 = 1e-8;

fn points(n: usize, count: usize) -> Vec<Point> {
    sample_points(n, count, 23)
}

fn hopf() -> LckStructure {
    LckStructure::new(hopf_lck_form(2), hopf_lee_form(2), &points(2, 40), TOL).unwrap()
}

#[test]
fn flat_form_has_zero_lee_form() {
    let lee = extract_lee_form(&flat_kahler_form(2), &points(2, 30), TOL).unwrap();
    assert!(lee.residual <= 1e-12);
    for p in points(2, 30) {
        assert!(lee.theta.sup_norm_at(&p) <= 1e-12);
    }
}

#[test]
fn hopf_lee_form_is_recovered() {
    let samples = points(2, 50);
    let lee = extract_lee_form(&hopf_lck_form(2), &samples, TOL).unwrap();
    for p in &samples {
        // oracle: exact gradient of −log|z|²
        let r2 = p.norm_sq();
        let exact: Vec<f64> = p.coords().iter().map(|x| -2.0 * x / r2).collect();
        let got = lee.theta.coefficients(p);
        assert!(got.iter().zip(&exact).all(|(a, b)| (a - b).abs() <= 1e-8));
    }
    assert!(lee.closedness <= 1e-10);
}

#[test]
fn square_system_reports_non_closed_lee_form() {
    // n = 2: θ ↦ θ∧ω is square, so only closedness can fail
    let omega = KForm::from_fn(2, 2, |x| {
        let o = x[0].order();
        let z = Jet::zero(4, o);
        let a = (&x[0] * &x[2]).add_scalar(1.0).scale(-1.0);
        vec![a, z.clone(), z.clone(), z.clone(), z, Jet::constant(4, o, -1.0)]
    });
    let samples = sample_points(2, 20, 5).into_iter().map(|p| Point::new(p.coords().iter().map(|c| c * 0.05).collect()).unwrap()).collect::<Vec<_>>();
    match extract_lee_form(&omega, &samples, TOL) {
        Err(Error::NotLck { what, residual, .. }) => {
            assert_eq!(what, "d theta");
            assert!(residual > 1e-3);
        }
        other => panic!("expected NotLck, got {other:?}"),
    }
}

#[test]
fn overdetermined_system_reports_defining_residual() {
    // n = 3, ω = ω̃ + 0.3 x₁ dy₂∧dx₃, dω decomposable but not of the form θ∧ω
    let flat = flat_kahler_form(3);
    let pert = KForm::basis_form(3, &[3, 4], 0.3).mul_scalar(&ScalarField::from_fn(3, |x| x[0].clone())).unwrap();
    let omega = flat.add(&pert).unwrap();
    let samples = sample_points(3, 10, 1).into_iter().map(|p| Point::new(p.coords().iter().map(|c| c * 0.1).collect()).unwrap()).collect::<Vec<_>>();
    match extract_lee_form(&omega, &samples, TOL) {
        Err(Error::NotLck { what, residual, point, .. }) => {
            assert_eq!(what, "d omega - theta ^ omega");
            assert!(residual > 1e-3);
            assert_eq!(point.n(), 3);
        }
        other => panic!("expected NotLck, got {other:?}"),
    }
}

#[test]
fn degenerate_forms_are_rank_errors() {
    let omega = KForm::basis_form(2, &[0, 1], 1.0);
    assert!(matches!(extract_lee_form(&omega, &points(2, 3), TOL), Err(Error::Rank(_))));
    assert!(matches!(extract_lee_form(&KForm::zero(2, 2), &points(2, 3), TOL), Err(Error::Rank(_))));
    assert!(matches!(extract_lee_form(&flat_kahler_form(1), &points(1, 3), TOL), Err(Error::Precondition(_))));
}

#[test]
fn validated_structures_meet_invariants_on_many_points() {
    let samples = points(2, 200);
    let s = LckStructure::from_omega(hopf_lck_form(2), &samples, TOL).unwrap();
    let r = s.residuals();
    assert!(r.defining <= 1e-8 && r.closedness <= 1e-8 && r.i_invariance <= 1e-10);
    assert!(r.min_eigenvalue > 0.0);
    assert_eq!(r.samples, 200);
}

#[test]
fn rescale_by_zero_and_round_trip() {
    let s = hopf();
    let samples = points(2, 20);
    let same = conformal_rescale(&s, &ScalarField::constant(2, 0.0), &samples, TOL).unwrap();
    for p in &samples {
        assert_eq!(same.omega().coefficients(p), s.omega().coefficients(p));
    }
    let f = ScalarField::from_fn(2, |x| (&x[0] * &x[3]).scale(0.01).sin());
    let there = conformal_rescale(&s, &f, &samples, TOL).unwrap();
    let back = conformal_rescale(&there, &f.scale(-1.0), &samples, TOL).unwrap();
    for p in &samples {
        let scale = 1.0 + sup(&s.omega().coefficients(p));
        assert!(close_coeffs(back.omega(), s.omega(), p) <= 1e-10 * scale);
    }
}

#[test]
fn rescaling_hopf_to_flat() {
    // ω′ = e^{−f} ω with f = −log|z|² gives ω̃ with θ′ = 0
    let s = hopf();
    let samples = points(2, 30);
    let f = norm_squared(2).map(|j| j.ln().scale(-1.0));
    let flat = conformal_rescale(&s, &f, &samples, TOL).unwrap();
    for p in &samples {
        assert!(flat.theta().sup_norm_at(p) <= 1e-8);
        assert!(close_coeffs(flat.omega(), &flat_kahler_form(2), p) <= 1e-10);
    }
    // the opposite sign doubles the Lee form instead
    let g = norm_squared(2).map(|j| j.ln());
    let doubled = conformal_rescale(&s, &g, &samples, TOL).unwrap();
    for p in &samples {
        let scale = 1.0 / p.norm_sq().sqrt();
        assert!(close_coeffs(doubled.theta(), &hopf_lee_form(2).scale(2.0), p) <= 1e-8 * scale.max(1.0));
    }
    assert_eq!(conventions::RESCALE_LEE_SIGN, -1.0);
}

#[test]
fn automorphy_residuals() {
    let w = flat_kahler_form(2);
    let samples = points(2, 20);
    let alpha = Complex64::new(0.3, -0.4);
    let deck = LinearMap::complex_scalar(2, alpha);
    assert!(check_automorphy(&w, &deck, alpha.norm_sqr(), &samples).unwrap() <= 1e-10);
    assert_eq!(check_automorphy(&w, &LinearMap::identity(2), 1.0, &samples).unwrap(), 0.0);
    let wrong = check_automorphy(&w, &deck, alpha.norm(), &samples).unwrap();
    let expect = (alpha.norm_sqr() - alpha.norm()).abs();
    assert!((wrong - expect).abs() <= 1e-12);
    // the Hopf LCK form is deck-invariant
    assert!(check_automorphy(&hopf_lck_form(2), &deck, 1.0, &samples).unwrap() <= 1e-10);
}

#[test]
fn weight_character_is_multiplicative() {
    let chi = WeightCharacter::new(0.25).unwrap();
    assert!((chi.value(3) - 0.25f64.powi(3)).abs() < 1e-16);
    assert!((chi.value(2) * chi.value(1) - chi.value(3)).abs() < 1e-16);
    assert_eq!(chi.compose(&chi).generator(), chi.value(2));
    assert!(WeightCharacter::new(0.0).is_err());
    assert!(WeightCharacter::new(-1.0).is_err());
}

#[test]
fn metric_is_positive_and_levi_civita() {
    let s = hopf();
    let g = s.metric();
    for p in points(2, 20) {
        assert!(g.min_eigenvalue(&p) > 0.0);
        let m = g.matrix(&p);
        assert!((&m - m.transpose()).amax() <= 1e-14);
        assert!(g.levi_civita_residual(&p).unwrap() <= 1e-8 / p.norm_sq().powf(1.5).min(1.0));
    }
    // g(X, Y) = ω(IX, Y) is the Euclidean metric for ω̃
    let flat = HermitianMetric::new(flat_kahler_form(2));
    let p = &points(2, 1)[0];
    assert!((flat.matrix(p) - nalgebra::DMatrix::<f64>::identity(4, 4)).amax() == 0.0);
}

/// Christoffel symbols by central differences of the closed-form metric `δ/|z|²`.
fn fd_christoffel(p: &Point, h: f64) -> Vec<Vec<Vec<f64>>> {
    let dim = p.dim();
    let g = |q: &Point, i: usize, j: usize| if i == j { 1.0 / q.norm_sq() } else { 0.0 };
    let dg = |k: usize, i: usize, j: usize| (g(&shifted(p, k, h), i, j) - g(&shifted(p, k, -h), i, j)) / (2.0 * h);
    let ginv = p.norm_sq();
    let mut out = vec![vec![vec![0.0; dim]; dim]; dim];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                out[k][i][j] = 0.5 * ginv * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j));
            }
        }
    }
    out
}

#[test]
fn hopf_is_vaisman_with_fd_cross_check() {
    let s = hopf();
    let samples = points(2, 50);
    let report = is_vaisman(&s, &samples, 1e-6).unwrap();
    assert!(report.vaisman);
    assert!(report.nabla_theta <= 1e-6);
    for p in samples.iter().take(10) {
        let jet = s.metric().christoffel(p).unwrap();
        let fd = fd_christoffel(p, 1e-5 * p.norm_sq().sqrt());
        let scale = 1.0 / p.norm_sq().sqrt();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert!((jet[k][i][j] - fd[k][i][j]).abs() <= 1e-6 * scale.max(1.0));
                }
            }
        }
    }
}

#[test]
fn flat_structure_is_trivially_vaisman() {
    let s = LckStructure::new(flat_kahler_form(2), KForm::zero(2, 1), &points(2, 10), TOL).unwrap();
    let r = is_vaisman(&s, &points(2, 10), 1e-6).unwrap();
    assert!(r.vaisman && r.nabla_theta == 0.0);
}

#[test]
fn generic_rescale_breaks_parallelism() {
    let samples = sample_points(2, 20, 4).into_iter().map(|p| Point::new(p.coords().iter().map(|c| c / p.norm_sq().sqrt()).collect()).unwrap()).collect::<Vec<_>>();
    let f = ScalarField::from_fn(2, |x| (&x[0] * &x[1]).scale(0.5));
    let s = conformal_rescale(&hopf(), &f, &samples, TOL).unwrap();
    let r = is_vaisman(&s, &samples, 1e-6).unwrap();
    assert!(!r.vaisman);
    assert!(r.nabla_theta > 1e-3);
}

#[test]
fn non_positive_metric_is_a_geometry_error() {
    let s = LckStructure::from_parts(flat_kahler_form(2).scale(-1.0), KForm::zero(2, 1)).unwrap();
    assert!(matches!(is_vaisman(&s, &points(2, 3), 1e-6), Err(Error::Geometry { .. })));
    assert!(matches!(s.validate(&points(2, 3), TOL), Err(Error::Geometry { .. })));
}

#[test]
fn vaisman_potential_of_classical_hopf() {
    let s = hopf();
    let samples = points(2, 30);
    let w = flat_kahler_form(2);
    let phi = vaisman_potential(&s, &w, s.theta(), &samples, 1e-6).unwrap();
    let dd = ddc(&phi).unwrap();
    let ratios: Vec<f64> = samples.iter().map(|p| dd.coefficients(p)[0] / w.coefficients(p)[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
    assert!(var <= 1e-8);
    assert!((mean - conventions::HOPF_VAISMAN_DDC).abs() <= 1e-8);
    for p in &samples {
        assert!(close_coeffs(&dd, &w.scale(mean), p) <= 1e-8);
        assert!((phi.value(p) - 4.0 * p.norm_sq()).abs() <= 1e-10 * p.norm_sq());
    }
    // bilinearity in the Kähler form
    let phi3 = vaisman_potential(&s, &w.scale(3.0), s.theta(), &samples, 1e-6).unwrap();
    for p in &samples {
        assert!((phi3.value(p) - 3.0 * phi.value(p)).abs() <= 1e-10 * phi.value(p));
    }
}

#[test]
fn vaisman_potential_rejects_degenerate_input() {
    let s = LckStructure::new(flat_kahler_form(2), KForm::zero(2, 1), &points(2, 5), TOL).unwrap();
    let r = vaisman_potential(&s, &flat_kahler_form(2), s.theta(), &points(2, 5), 1e-6);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn lee_form_extraction_is_rotation_equivariant() {
    let rot = CircleAction::rotation(2);
    let a = rot.flow().at(0.7);
    let omega = hopf_lck_form(2);
    let theta = hopf_lee_form(2);
    let samples = points(2, 30);
    let lee = extract_lee_form(&pullback(&a, &omega).unwrap(), &samples, TOL).unwrap();
    let pulled = pullback(&a, &theta).unwrap();
    for p in &samples {
        assert!(close_coeffs(&lee.theta, &pulled, p) <= 1e-8);
    }
}

#[test]
fn circle_lift_acts_by_a_constant_homothety() {
    let w = flat_kahler_form(2);
    let samples = points(2, 30);
    for t in [0.3, 2.0] {
        let a = CircleAction::rotation(2).flow().at(t);
        let pw = pullback(&a, &w).unwrap();
        let scales: Vec<f64> = samples.iter().map(|p| pw.coefficients(p)[0] / w.coefficients(p)[0]).collect();
        let mean = scales.iter().sum::<f64>() / scales.len() as f64;
        let var = scales.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scales.len() as f64;
        assert!(var <= 1e-10);
        for p in &samples {
            assert!(close_coeffs(&pw, &w.scale(mean), p) <= 1e-10);
        }
    }
}
