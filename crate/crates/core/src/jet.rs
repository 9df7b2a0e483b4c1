//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] of order `K` in `d` variables stores the Taylor coefficients of a
//! smooth function at a base point, in the displacement variables `s = x - p`,
//! up to total degree `K`. Arithmetic is exact up to truncation, so derivatives
//! obtained from a jet are exact forward-mode derivatives rather than finite
//! differences.
//!
//! Monomials are stored in graded order: all degree-0 terms, then degree 1,
//! and so on. The table for order `K - 1` is therefore a prefix of the table
//! for order `K`, which makes truncation and differentiation cheap.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

/// Index layout shared by every jet with the same `(vars, order)`.
pub struct MonomialTable {
    vars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    /// `len_upto[k]` is the number of monomials of total degree `<= k`.
    len_upto: Vec<usize>,
    /// `(parent, var)` with `exps[m] = exps[parent] + e_var`, for `m >= 1`.
    parent: Vec<(usize, usize)>,
    /// `raise[m * vars + v]` is the index of `exps[m] + e_v`, if within order.
    raise: Vec<Option<usize>>,
    /// Triples `(i, j, k)` with `exps[i] + exps[j] = exps[k]`.
    products: Vec<(u32, u32, u32)>,
}

impl MonomialTable {
    fn build(vars: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut len_upto = Vec::with_capacity(order + 1);
        for deg in 0..=order {
            push_degree(vars, deg, &mut exps);
            len_upto.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut parent = vec![(0, 0); exps.len()];
        for (m, e) in exps.iter().enumerate().skip(1) {
            let v = e.iter().position(|&x| x > 0).expect("nonzero monomial");
            let mut p = e.clone();
            p[v] -= 1;
            parent[m] = (index[&p], v);
        }

        let mut raise = vec![None; exps.len() * vars];
        for (m, e) in exps.iter().enumerate() {
            for v in 0..vars {
                let mut up = e.clone();
                up[v] += 1;
                raise[m * vars + v] = index.get(&up).copied();
            }
        }

        let degrees: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let mut products = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }

        Self {
            vars,
            order,
            exps,
            len_upto,
            parent,
            raise,
            products,
        }
    }

    /// Interned table for `(vars, order)`.
    pub fn get(vars: usize, order: usize) -> &'static MonomialTable {
        static TABLES: OnceLock<Mutex<HashMap<(usize, usize), &'static MonomialTable>>> =
            OnceLock::new();
        let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial table cache poisoned");
        guard
            .entry((vars, order))
            .or_insert_with(|| Box::leak(Box::new(MonomialTable::build(vars, order))))
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, m: usize) -> &[u8] {
        &self.exps[m]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let deg: usize = exps.iter().map(|&x| x as usize).sum();
        if exps.len() != self.vars || deg > self.order {
            return None;
        }
        (self.len_upto.get(deg.wrapping_sub(1)).copied().unwrap_or(0)..self.len_upto[deg])
            .find(|&m| self.exps[m] == exps)
    }
}

fn push_degree(vars: usize, deg: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(cur: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for take in (0..=left).rev() {
            cur[pos] = take as u8;
            rec(cur, pos + 1, left - take, out);
        }
        cur[pos] = 0;
    }
    if vars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    let mut cur = vec![0u8; vars];
    rec(&mut cur, 0, deg, out);
}

/// Truncated Taylor polynomial in `vars` displacement variables.
#[derive(Clone)]
pub struct Jet {
    table: &'static MonomialTable,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("vars", &self.table.vars)
            .field("order", &self.table.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(vars: usize, order: usize, value: f64) -> Self {
        let table = MonomialTable::get(vars, order);
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = value;
        Self { table, coeffs }
    }

    pub fn zero(vars: usize, order: usize) -> Self {
        Self::constant(vars, order, 0.0)
    }

    /// Coordinate function `x_var` expanded at `value`.
    pub fn variable(vars: usize, order: usize, value: f64, var: usize) -> Self {
        let mut jet = Self::constant(vars, order, value);
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// Identity-seeded coordinate jets at a point.
    pub fn coordinates(point: &[f64], order: usize) -> Vec<Jet> {
        let vars = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(vars, order, x, i))
            .collect()
    }

    pub fn from_coeffs(vars: usize, order: usize, coeffs: Vec<f64>) -> Self {
        let table = MonomialTable::get(vars, order);
        assert_eq!(coeffs.len(), table.len(), "coefficient count mismatch");
        Self { table, coeffs }
    }

    pub fn table(&self) -> &'static MonomialTable {
        self.table
    }

    pub fn vars(&self) -> usize {
        self.table.vars
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn partial(&self, exps: &[u8]) -> f64 {
        match self.table.index_of(exps) {
            Some(m) => {
                let fact: f64 = exps
                    .iter()
                    .map(|&e| (1..=e as u64).product::<u64>() as f64)
                    .product();
                self.coeffs[m] * fact
            }
            None => 0.0,
        }
    }

    pub fn gradient(&self) -> Vec<f64> {
        let d = self.vars();
        if self.order() == 0 {
            return vec![0.0; d];
        }
        self.coeffs[1..=d].to_vec()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let d = self.vars();
        let mut h = vec![vec![0.0; d]; d];
        if self.order() < 2 {
            return h;
        }
        for (a, row) in h.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                let mut e = vec![0u8; d];
                e[a] += 1;
                e[b] += 1;
                *entry = self.partial(&e);
            }
        }
        h
    }

    /// Keep only terms of total degree `<= order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let table = MonomialTable::get(self.vars(), order);
        Jet {
            table,
            coeffs: self.coeffs[..table.len()].to_vec(),
        }
    }

    /// `∂/∂x_var`, one order lower.
    pub fn diff(&self, var: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let table = MonomialTable::get(self.vars(), self.order() - 1);
        let src = self.table;
        let coeffs = (0..table.len())
            .map(|m| {
                let up = src.raise[m * src.vars + var].expect("raised monomial within order");
                (src.exps[m][var] as f64 + 1.0) * self.coeffs[up]
            })
            .collect();
        Jet { table, coeffs }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            table: self.table,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    /// `self += k * other`, in place.
    pub fn axpy(&mut self, k: f64, other: &Jet) {
        if k == 0.0 {
            return;
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        if other.coeffs.len() < self.coeffs.len() {
            *self = self.truncate(other.order());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs[..n]) {
            *a += k * b;
        }
    }

    fn aligned<'a>(a: &'a Jet, b: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(a.vars(), b.vars(), "jets over different variable counts");
        match a.order().cmp(&b.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(a), Cow::Borrowed(b)),
            std::cmp::Ordering::Less => (Cow::Borrowed(a), Cow::Owned(b.truncate(a.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(a.truncate(b.order())), Cow::Borrowed(b)),
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let (a, b) = Self::aligned(self, other);
        if b.is_constant() {
            return a.scale(b.coeffs[0]);
        }
        if a.is_constant() {
            return b.scale(a.coeffs[0]);
        }
        let table = a.table;
        let mut coeffs = vec![0.0; table.len()];
        for &(i, j, k) in &table.products {
            coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet { table, coeffs }
    }

    /// `f(self)` from the Taylor coefficients `taylor[k] = f^(k)(c0) / k!`.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Jet {
        let order = self.order();
        debug_assert!(taylor.len() > order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.vars(), order, taylor[order]);
        for k in (0..order).rev() {
            acc = acc.mul_jet(&h);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let c = self.value();
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / c.powi(k as i32 + 1)
            })
            .collect();
        self.compose_univariate(&taylor)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut fact = 1.0;
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                e / fact
            })
            .collect();
        self.compose_univariate(&taylor)
    }

    pub fn ln(&self) -> Jet {
        let c = self.value();
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k == 0 {
                    c.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * c.powi(k as i32))
                }
            })
            .collect();
        self.compose_univariate(&taylor)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let c = self.value();
        let mut binom = 1.0;
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    binom *= (p - (k as f64 - 1.0)) / k as f64;
                }
                binom * c.powf(p - k as f64)
            })
            .collect();
        self.compose_univariate(&taylor)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(1)
    }

    fn trig(&self, shift: usize) -> Jet {
        let c = self.value();
        let cycle = [c.sin(), c.cos(), -c.sin(), -c.cos()];
        let mut fact = 1.0;
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                cycle[(k + shift) % 4] / fact
            })
            .collect();
        self.compose_univariate(&taylor)
    }

    /// Substitute `s = M s'` where row `v` of `matrix` expresses the old
    /// displacement variable `s_v` in the new variables. Used for pullback by
    /// linear maps.
    pub fn compose_linear(&self, matrix: &[Vec<f64>]) -> Jet {
        let table = self.table;
        if self.order() == 0 || self.is_constant() {
            return self.clone();
        }
        let vars = table.vars;
        let order = table.order;
        let lin: Vec<Jet> = (0..vars)
            .map(|v| {
                let mut coeffs = vec![0.0; table.len()];
                coeffs[1..=vars].copy_from_slice(&matrix[v][..vars]);
                Jet { table, coeffs }
            })
            .collect();
        let mut powers: Vec<Jet> = Vec::with_capacity(table.len());
        let mut out = Jet::constant(vars, order, self.coeffs[0]);
        powers.push(Jet::constant(vars, order, 1.0));
        for m in 1..table.len() {
            let (p, v) = table.parent[m];
            let mono = powers[p].mul_jet(&lin[v]);
            out.axpy(self.coeffs[m], &mono);
            powers.push(mono);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        Jet {
            table: a.table,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        Jet {
            table: a.table,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.axpy(1.0, rhs);
    }
}

/// Solve `a x = b` over jets by Gaussian elimination with partial pivoting on
/// the base-point values. Returns `None` when a pivot falls below
/// `pivot_floor` (relative to the largest entry of `a`).
pub fn solve(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>, pivot_floor: f64) -> Option<Vec<Jet>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|j| j.value().abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .value()
                    .abs()
                    .total_cmp(&a[j][col].value().abs())
            })
            .expect("nonempty pivot range");
        if a[piv][col].value().abs() <= pivot_floor * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            if a[row][col].max_abs() == 0.0 {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &delta;
            }
            let delta = &factor * &b[col];
            b[row] = &b[row] - &delta;
        }
    }
    let mut x: Vec<Jet> = vec![Jet::zero(b[0].vars(), b[0].order()); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = &acc - &(&a[row][k] * &x[k]);
        }
        x[row] = &acc * &a[row][row].recip();
    }
    Some(x)
}
