#![allow(dead_code)]

use lckit::form::{Basis, KForm, Point};

pub fn close_coeffs(a: &KForm, b: &KForm, p: &Point) -> f64 {
    a.coefficients(p)
        .iter()
        .zip(b.coefficients(p))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn shifted(p: &Point, i: usize, h: f64) -> Point {
    let mut c = p.coords().to_vec();
    c[i] += h;
    Point::new(c).unwrap()
}

/// Central difference of a coefficient vector along coordinate `i`.
pub fn fd_coeffs(f: impl Fn(&Point) -> Vec<f64>, p: &Point, i: usize, h: f64) -> Vec<f64> {
    let a = f(&shifted(p, i, h));
    let b = f(&shifted(p, i, -h));
    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

/// Exterior derivative by central differences of the coefficients of `a`.
pub fn fd_exterior_d(a: &KForm, p: &Point, h: f64) -> Vec<f64> {
    let (dim, k) = (a.dim(), a.degree());
    let src = Basis::get(dim, k);
    let dst = Basis::get(dim, k + 1);
    let mut out = vec![0.0; dst.len()];
    for var in 0..dim {
        let der = fd_coeffs(|q| a.coefficients(q), p, var, h);
        for (is, combo) in src.combos.iter().enumerate() {
            let mut idx = vec![var];
            idx.extend_from_slice(combo);
            let mut sorted = idx.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let sign = permutation_sign(&idx);
            out[dst.index_of(&sorted).unwrap()] += sign * der[is];
        }
    }
    out
}

pub fn permutation_sign(idx: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] > idx[j] {
                s = -s;
            }
        }
    }
    s
}

/// Brute-force alternating sum: `Σ_σ sgn σ Π_j dx_{I_j}(v_{σ j})` summed over coefficients.
pub fn brute_evaluate(a: &KForm, p: &Point, vs: &[&[f64]]) -> f64 {
    let coeffs = a.coefficients(p);
    let basis = Basis::get(a.dim(), a.degree());
    let k = vs.len();
    let perms = permutations(k);
    let mut total = 0.0;
    for (c, combo) in coeffs.iter().zip(&basis.combos) {
        for perm in &perms {
            let mut prod = permutation_sign(perm);
            for j in 0..k {
                prod *= vs[perm[j]][combo[j]];
            }
            total += c * prod;
        }
    }
    total
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}
