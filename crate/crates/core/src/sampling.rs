//! Deterministic sample points on `ℂⁿ \ {0}`.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::flows::LinearMap;
use crate::form::{Basis, KForm, Point};
use crate::jet::Jet;

pub const RADIUS_MIN: f64 = 0.1;
pub const RADIUS_MAX: f64 = 10.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit vector from the uniform distribution on the sphere `S^{dim−1}`.
pub fn unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Gaussian vector, used for random tangent vectors.
pub fn gaussian_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Log-uniform radius in `[lo, hi]` times a uniform direction.
pub fn sample_point_in(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Point {
    let r = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    let u = unit_vector(rng, 2 * n);
    Point::new(u.into_iter().map(|x| r * x).collect()).expect("finite sample")
}

pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Point> {
    sample_points_in(n, count, seed, RADIUS_MIN, RADIUS_MAX)
}

pub fn sample_points_in(n: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Point> {
    let mut r = rng(seed);
    (0..count).map(|_| sample_point_in(&mut r, n, lo, hi)).collect()
}

/// Largest value of `f` over `samples` and the index where it occurs.
///
/// Evaluated in parallel, reduced in sample order; NaN counts as infinite.
pub fn worst_over(samples: &[Point], f: impl Fn(&Point) -> f64 + Sync) -> (f64, usize) {
    let values: Vec<f64> = samples.par_iter().map(&f).collect();
    let mut worst = (0.0, 0);
    for (i, v) in values.into_iter().enumerate() {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > worst.0 {
            worst = (v, i);
        }
    }
    worst
}

/// Fallible variant of [`worst_over`]; the first error in sample order wins.
pub fn try_worst_over(
    samples: &[Point],
    f: impl Fn(&Point) -> crate::Result<f64> + Sync,
) -> crate::Result<(f64, usize)> {
    let values: Vec<crate::Result<f64>> = samples.par_iter().map(&f).collect();
    let mut worst = (0.0, 0);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > worst.0 {
            worst = (v, i);
        }
    }
    Ok(worst)
}

/// Random smooth `k`-form on `ℂⁿ`: each coefficient is a random quadratic
/// plus a random multiple of `1 / (1 + |x|²)`.
pub fn random_form(n: usize, k: usize, seed: u64) -> KForm {
    let dim = 2 * n;
    let len = Basis::get(dim, k).len();
    let mut r = rng(seed);
    let params: Vec<(f64, Vec<f64>, Vec<f64>, f64)> = (0..len)
        .map(|_| {
            (
                r.random_range(-1.0..1.0),
                gaussian_vector(&mut r, dim),
                gaussian_vector(&mut r, dim),
                r.random_range(-1.0..1.0),
            )
        })
        .collect();
    KForm::from_fn(n, k, move |x| {
        let order = x[0].order();
        let mut r2 = Jet::constant(dim, order, 1.0);
        for xi in x {
            r2 += &(xi * xi);
        }
        let rat = r2.recip();
        params
            .iter()
            .map(|(c, lin, quad, q)| {
                let mut acc = Jet::constant(dim, order, *c);
                for (i, xi) in x.iter().enumerate() {
                    acc.axpy(lin[i], xi);
                    acc.axpy(quad[i], &(xi * &x[(i + 1) % dim]));
                }
                acc.axpy(*q, &rat);
                acc
            })
            .collect()
    })
}

/// Real `2n × 2n` matrix with i.i.d. `N(0, scale²)` entries.
pub fn random_linear(n: usize, seed: u64, scale: f64) -> LinearMap {
    let dim = 2 * n;
    let mut r = rng(seed);
    LinearMap::new((0..dim).map(|_| gaussian_vector(&mut r, dim).iter().map(|x| x * scale).collect()).collect())
        .expect("square")
}
