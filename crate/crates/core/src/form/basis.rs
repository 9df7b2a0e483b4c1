//! Multi-index bookkeeping for dense form storage.
//!
//! A `k`-form on `ℝ^dim` is stored as its `C(dim, k)` coefficients over strictly
//! increasing index tuples, in lexicographic order. All the sign tables used
//! by the pointwise operators are computed once per shape and interned.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Mutex, OnceLock};

type Cache<K, V> = OnceLock<Mutex<HashMap<K, &'static V>>>;

fn intern<K: Hash + Eq, V>(cache: &'static Cache<K, V>, key: K, build: impl FnOnce() -> V) -> &'static V {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("basis cache poisoned");
    guard.entry(key).or_insert_with(|| Box::leak(Box::new(build())))
}

pub struct Basis {
    pub dim: usize,
    pub k: usize,
    pub combos: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl Basis {
    pub fn get(dim: usize, k: usize) -> &'static Basis {
        static CACHE: Cache<(usize, usize), Basis> = OnceLock::new();
        intern(&CACHE, (dim, k), || {
            let combos = combinations(dim, k);
            let index = combos.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
            Basis { dim, k, combos, index }
        })
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn index_of(&self, sorted: &[usize]) -> Option<usize> {
        self.index.get(sorted).copied()
    }
}

pub fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= dim {
        rec(0, dim, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sort `idx` in place; returns the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Entries `(a, b, out, sign)`: `(α∧β)_out += sign · α_a β_b`.
pub struct WedgeTable {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl WedgeTable {
    pub fn get(dim: usize, p: usize, q: usize) -> &'static WedgeTable {
        static CACHE: Cache<(usize, usize, usize), WedgeTable> = OnceLock::new();
        intern(&CACHE, (dim, p, q), || {
            let (bp, bq, bk) = (Basis::get(dim, p), Basis::get(dim, q), Basis::get(dim, p + q));
            let mut entries = Vec::new();
            for (ia, a) in bp.combos.iter().enumerate() {
                for (ib, b) in bq.combos.iter().enumerate() {
                    let mut joined: Vec<usize> = a.iter().chain(b).copied().collect();
                    if let Some(sign) = sort_with_sign(&mut joined) {
                        entries.push((ia, ib, bk.index_of(&joined).expect("basis"), sign));
                    }
                }
            }
            WedgeTable { entries }
        })
    }
}

/// Entries `(src, var, dst, sign)`: `(dα)_dst += sign · ∂_var α_src`.
pub struct DerivTable {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl DerivTable {
    pub fn get(dim: usize, k: usize) -> &'static DerivTable {
        static CACHE: Cache<(usize, usize), DerivTable> = OnceLock::new();
        intern(&CACHE, (dim, k), || {
            let (src, dst) = (Basis::get(dim, k), Basis::get(dim, k + 1));
            let mut entries = Vec::new();
            for (is, combo) in src.combos.iter().enumerate() {
                for var in 0..dim {
                    let mut joined = Vec::with_capacity(k + 1);
                    joined.push(var);
                    joined.extend_from_slice(combo);
                    if let Some(sign) = sort_with_sign(&mut joined) {
                        entries.push((is, var, dst.index_of(&joined).expect("basis"), sign));
                    }
                }
            }
            DerivTable { entries }
        })
    }
}

/// Entries `(src, var, dst, sign)`: `(ι_X α)_dst += sign · X^var α_src`.
pub struct InteriorTable {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl InteriorTable {
    pub fn get(dim: usize, k: usize) -> &'static InteriorTable {
        static CACHE: Cache<(usize, usize), InteriorTable> = OnceLock::new();
        intern(&CACHE, (dim, k), || {
            let (src, dst) = (Basis::get(dim, k), Basis::get(dim, k - 1));
            let mut entries = Vec::new();
            for (is, combo) in src.combos.iter().enumerate() {
                for pos in 0..k {
                    let rest: Vec<usize> = combo
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != pos)
                        .map(|(_, &c)| c)
                        .collect();
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    entries.push((is, combo[pos], dst.index_of(&rest).expect("basis"), sign));
                }
            }
            InteriorTable { entries }
        })
    }
}

pub fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("nonempty");
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    d
}

/// Induced action of a linear map on `k`-form coefficients:
/// `(M^*α)_I = Σ_J α_J det(M[J, I])`, i.e. `(M^*α)(v…) = α(Mv…)`.
#[derive(Clone, Debug)]
pub struct InducedMap {
    /// Sparse rows: for each output index `I`, the pairs `(J, det M[J, I])`.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl InducedMap {
    pub fn new(matrix: &[Vec<f64>], k: usize) -> Self {
        let dim = matrix.len();
        let basis = Basis::get(dim, k);
        let rows = basis
            .combos
            .iter()
            .map(|cols| {
                basis
                    .combos
                    .iter()
                    .enumerate()
                    .filter_map(|(j, rws)| {
                        let minor: Vec<Vec<f64>> = rws
                            .iter()
                            .map(|&r| cols.iter().map(|&c| matrix[r][c]).collect())
                            .collect();
                        let value = if k == 0 { 1.0 } else { det(minor) };
                        (value.abs() > 1e-300).then_some((j, value))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}
