//! Randomized algebraic identities over seeds, points and degrees.

mod common;

use common::close_coeffs;
use lckit::flows::pullback;
use lckit::form::{exterior_d, interior_product, lie_derivative, wedge, KForm, VectorField};
use lckit::sampling::{random_form, random_linear};
use lckit::Point;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn point() -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0f64..2.0, 4).prop_map(|c| Point::new(c).unwrap())
}

fn relative(a: &KForm, b: &KForm, p: &Point) -> f64 {
    close_coeffs(a, b, p) / (1.0 + a.sup_norm_at(p).max(b.sup_norm_at(p)))
}

fn linear_field(seed: u64) -> VectorField {
    VectorField::from_matrix(random_linear(2, seed, 1.0).rows())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), k in 0usize..3, p in point()) {
        let a = random_form(2, k, seed);
        let dd = exterior_d(&exterior_d(&a).unwrap()).unwrap();
        prop_assert!(dd.sup_norm_at(&p) <= TOL);
    }

    #[test]
    fn wedge_is_graded_commutative(s1 in any::<u64>(), s2 in any::<u64>(), k in 0usize..3, l in 0usize..3, p in point()) {
        let a = random_form(2, k, s1);
        let b = random_form(2, l, s2);
        let sign = if (k * l) % 2 == 0 { 1.0 } else { -1.0 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(sign);
        prop_assert!(relative(&ab, &ba, &p) <= TOL);
    }

    #[test]
    fn wedge_is_associative(s in any::<u64>(), p in point()) {
        let a = random_form(2, 1, s);
        let b = random_form(2, 1, s ^ 1);
        let c = random_form(2, 2, s ^ 2);
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert!(relative(&left, &right, &p) <= TOL);
    }

    #[test]
    fn pullback_commutes_with_d(s in any::<u64>(), k in 0usize..3, p in point()) {
        let a = random_form(2, k, s);
        let m = random_linear(2, s ^ 7, 0.7);
        let left = exterior_d(&pullback(&m, &a).unwrap()).unwrap();
        let right = pullback(&m, &exterior_d(&a).unwrap()).unwrap();
        prop_assert!(relative(&left, &right, &p) <= TOL);
    }

    #[test]
    fn pullback_respects_wedge(s in any::<u64>(), p in point()) {
        let a = random_form(2, 1, s);
        let b = random_form(2, 2, s ^ 3);
        let m = random_linear(2, s ^ 5, 0.7);
        let left = pullback(&m, &wedge(&a, &b).unwrap()).unwrap();
        let right = wedge(&pullback(&m, &a).unwrap(), &pullback(&m, &b).unwrap()).unwrap();
        prop_assert!(relative(&left, &right, &p) <= TOL);
    }

    #[test]
    fn interior_product_squares_to_zero(s in any::<u64>(), k in 2usize..5, p in point()) {
        let a = random_form(2, k, s);
        let x = linear_field(s ^ 11);
        let ii = interior_product(&x, &interior_product(&x, &a).unwrap()).unwrap();
        prop_assert!(ii.sup_norm_at(&p) <= TOL * (1.0 + a.sup_norm_at(&p)));
    }

    #[test]
    fn lie_derivative_commutes_with_d(s in any::<u64>(), k in 0usize..3, p in point()) {
        let a = random_form(2, k, s);
        let x = linear_field(s ^ 13);
        let left = exterior_d(&lie_derivative(&x, &a).unwrap()).unwrap();
        let right = lie_derivative(&x, &exterior_d(&a).unwrap()).unwrap();
        prop_assert!(relative(&left, &right, &p) <= TOL);
    }
}
