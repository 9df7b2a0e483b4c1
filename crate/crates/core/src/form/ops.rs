//! Exterior calculus on jet-valued forms.
//!
//! Each operator returns a new lazily evaluated [`KForm`]; evaluating the
//! result at order `k` pulls the inputs at whatever order the operator needs
//! (`d` needs one more, Lie derivatives need one more of both the field and
//! the form).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::form::basis::{DerivTable, InducedMap, InteriorTable, WedgeTable};
use crate::form::fields::check_depth;
use crate::form::{ComplexStructure, KForm, VectorField};
use crate::jet::Jet;

pub(crate) fn wedge_jets(dim: usize, p: usize, a: &[Jet], q: usize, b: &[Jet], len: usize) -> Vec<Jet> {
    let order = a[0].order().min(b[0].order());
    let mut out = vec![Jet::zero(dim, order); len];
    for &(ia, ib, k, sign) in &WedgeTable::get(dim, p, q).entries {
        let prod = &a[ia] * &b[ib];
        out[k].axpy(sign, &prod);
    }
    out
}

/// `a` at order `K` gives `dα` at order `K − 1`.
pub(crate) fn d_jets(dim: usize, k: usize, a: &[Jet], len: usize) -> Vec<Jet> {
    let order = a[0].order() - 1;
    let mut out = vec![Jet::zero(dim, order); len];
    for &(src, var, dst, sign) in &DerivTable::get(dim, k).entries {
        if a[src].max_abs() == 0.0 {
            continue;
        }
        out[dst].axpy(sign, &a[src].diff(var));
    }
    out
}

pub(crate) fn interior_jets(dim: usize, k: usize, x: &[Jet], a: &[Jet], len: usize) -> Vec<Jet> {
    let order = a[0].order().min(x[0].order());
    let mut out = vec![Jet::zero(dim, order); len];
    for &(src, var, dst, sign) in &InteriorTable::get(dim, k).entries {
        if a[src].max_abs() == 0.0 || x[var].max_abs() == 0.0 {
            continue;
        }
        let prod = &x[var] * &a[src];
        out[dst].axpy(sign, &prod);
    }
    out
}

pub(crate) fn induced_jets(map: &InducedMap, a: &[Jet]) -> Vec<Jet> {
    let dim = a[0].vars();
    let order = a[0].order();
    map.rows
        .iter()
        .map(|row| {
            let mut acc = Jet::zero(dim, order);
            for &(j, c) in row {
                acc.axpy(c, &a[j]);
            }
            acc
        })
        .collect()
}

fn same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// `α ∧ β`.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    same_n(a.n(), b.n())?;
    let (p, q, n) = (a.degree(), b.degree(), a.n());
    if p + q > 2 * n {
        return Err(Error::Degree {
            op: "wedge",
            degree: p + q,
            reason: "total degree exceeds 2n",
        });
    }
    if a.is_zero() || b.is_zero() {
        return Ok(KForm::zero(n, p + q));
    }
    let (x, y) = (a.clone(), b.clone());
    let len = KForm::zero(n, p + q).len();
    Ok(KForm::raw(n, p + q, a.depth().max(b.depth()), move |pt, order| {
        wedge_jets(2 * n, p, &x.jets_at(pt, order), q, &y.jets_at(pt, order), len)
    }))
}

/// Exterior derivative from exact coefficient jets.
pub fn exterior_d(a: &KForm) -> Result<KForm> {
    let (n, k) = (a.n(), a.degree());
    if k >= 2 * n {
        return Err(Error::Degree {
            op: "exterior_d",
            degree: k,
            reason: "top-degree forms have no derivative",
        });
    }
    if a.is_zero() {
        return Ok(KForm::zero(n, k + 1));
    }
    let depth = check_depth(a.depth() + 1)?;
    let x = a.clone();
    let len = KForm::zero(n, k + 1).len();
    Ok(KForm::raw(n, k + 1, depth, move |pt, order| {
        d_jets(2 * n, k, &x.jets_at(pt, order + 1), len)
    }))
}

/// `(Iα)(X₁, …, X_k) = (−1)^k α(IX₁, …, IX_k)`.
pub fn apply_i(a: &KForm) -> KForm {
    let (n, k) = (a.n(), a.degree());
    if a.is_zero() {
        return a.clone();
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let matrix = ComplexStructure::new(n).matrix();
    let map = Arc::new(InducedMap::new(&matrix, k));
    let x = a.clone();
    KForm::raw(n, k, a.depth(), move |pt, order| {
        induced_jets(&map, &x.jets_at(pt, order))
            .into_iter()
            .map(|j| j.scale(sign))
            .collect()
    })
}

/// `d^c = −I ∘ d ∘ I`.
pub fn d_c(a: &KForm) -> Result<KForm> {
    Ok(apply_i(&exterior_d(&apply_i(a))?).scale(-1.0))
}

/// `dd^c f` for a scalar potential.
pub fn ddc(f: &crate::form::ScalarField) -> Result<KForm> {
    exterior_d(&d_c(f.as_form())?)
}

/// Contraction `ι_X α` in the first slot.
pub fn interior_product(x: &VectorField, a: &KForm) -> Result<KForm> {
    same_n(x.n(), a.n())?;
    let (n, k) = (a.n(), a.degree());
    if k == 0 {
        return Err(Error::Degree {
            op: "interior_product",
            degree: 0,
            reason: "cannot contract a 0-form",
        });
    }
    if a.is_zero() || x.is_zero() {
        return Ok(KForm::zero(n, k - 1));
    }
    let (v, f) = (x.clone(), a.clone());
    let len = KForm::zero(n, k - 1).len();
    Ok(KForm::raw(n, k - 1, a.depth().max(x.depth()), move |pt, order| {
        interior_jets(2 * n, k, &v.jets_at(pt, order), &f.jets_at(pt, order), len)
    }))
}

/// `Lie_X α = d ι_X α + ι_X dα` (Cartan).
pub fn lie_derivative(x: &VectorField, a: &KForm) -> Result<KForm> {
    same_n(x.n(), a.n())?;
    let (n, k) = (a.n(), a.degree());
    if a.is_zero() || x.is_zero() {
        return Ok(KForm::zero(n, k));
    }
    check_depth(a.depth().max(x.depth()) + 1)?;
    let via_d = if k < 2 * n {
        interior_product(x, &exterior_d(a)?)?
    } else {
        KForm::zero(n, k)
    };
    if k == 0 {
        return Ok(via_d);
    }
    let via_i = exterior_d(&interior_product(x, a)?)?;
    via_i.add(&via_d)
}

/// Apply a constant linear map to the coefficients at each point without
/// moving the base point: `(M^*α)_p(v…) = α_p(Mv…)`.
pub fn pointwise_transform(a: &KForm, matrix: &[Vec<f64>]) -> KForm {
    if a.is_zero() {
        return a.clone();
    }
    let map = Arc::new(InducedMap::new(matrix, a.degree()));
    let x = a.clone();
    KForm::raw(a.n(), a.degree(), a.depth(), move |pt, order| {
        induced_jets(&map, &x.jets_at(pt, order))
    })
}
