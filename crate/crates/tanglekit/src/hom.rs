//! The morphism complex `Mor(X, Y)` between two type D structures:
//! chain-group bases per bigrading, null-homotopy certificates, and
//! bigraded homology over a δ-window.
//!
//! `Mor(X, Y)` is supported on finitely many bigradings above any δ
//! threshold and usually on infinitely many below, so homology is
//! computed top-down: start at the largest supported 2δ and extend the
//! window downward until a run of `band` consecutive zero rows appears
//! (heuristic stabilization) or `cap` rows have been examined.

use crate::algebra::{AlgElem, BasisPath, Bigrading};
use crate::f2::BitMat;
use crate::typed::{MorElem, TypeD, TypedError, ARROW_DEGREE};
use std::collections::BTreeMap;

/// Basis of the chain group `Mor(X, Y)` in degree `g`: all triples
/// `(x, p, y)` with `right(p)=idem(x)`, `left(p)=idem(y)` and
/// `gr(p) + gr(y) − gr(x) = g`. At most two per generator pair.
pub fn mor_basis(x: &TypeD, y: &TypeD, g: Bigrading) -> Vec<(usize, usize, BasisPath)> {
    let mut out = Vec::new();
    for (xi, gx) in x.gens().iter().enumerate() {
        for (yj, gy) in y.gens().iter().enumerate() {
            let t = g - (gy.gr - gx.gr);
            if t.q != t.delta2 || t.q > 0 {
                continue;
            }
            let n = (-t.q) as u32;
            if n == 0 {
                if gx.idem == gy.idem {
                    out.push((xi, yj, BasisPath::unit(gx.idem)));
                }
                continue;
            }
            let s = BasisPath::s(n, gx.idem);
            if s.left() == gy.idem {
                out.push((xi, yj, s));
            }
            if n % 2 == 0 && gx.idem == gy.idem {
                out.push((xi, yj, BasisPath::d(n / 2, gx.idem)));
            }
        }
    }
    out
}

fn single(gr: Bigrading, e: &(usize, usize, BasisPath)) -> MorElem {
    let mut f = MorElem::zero(gr);
    f.add_entry(e.0, e.1, AlgElem::from_path(e.2));
    f
}

/// Matrix of `∂: Mor(X,Y)_g → Mor(X,Y)_{g+(0,−2)}` in the `mor_basis` bases.
pub(crate) fn boundary_matrix(
    x: &TypeD,
    y: &TypeD,
    g: Bigrading,
    source: &[(usize, usize, BasisPath)],
    target: &[(usize, usize, BasisPath)],
) -> BitMat {
    let tix: BTreeMap<&(usize, usize, BasisPath), usize> =
        target.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut mat = BitMat::zero(target.len(), source.len());
    for (c, e) in source.iter().enumerate() {
        for (s, d, l) in single(g, e).boundary(x, y).entries() {
            for &t in l.terms() {
                let key = (s, d, t);
                let r = tix
                    .get(&key)
                    .unwrap_or_else(|| panic!("boundary term {t} at ({s},{d}) outside basis"));
                mat.flip(*r, c);
            }
        }
    }
    mat
}

/// Whether the chain map `f: X → Y` bounds, and a homotopy witness `h`
/// with `∂h = f` when it does. Errors if `f` is malformed or not a cycle.
pub fn null_homotopy(f: &MorElem, x: &TypeD, y: &TypeD) -> Result<Option<MorElem>, TypedError> {
    f.validate(x, y)?;
    let bdry = f.boundary(x, y);
    if let Some((s, d, v)) = bdry.entries().next() {
        return Err(TypedError::NotChainMap {
            src: x.gens()[s].id.clone(),
            dst: y.gens()[d].id.clone(),
            value: v.to_string(),
        });
    }
    let hg = f.gr - ARROW_DEGREE;
    let target = mor_basis(x, y, f.gr);
    let source = mor_basis(x, y, hg);
    let tix: BTreeMap<&(usize, usize, BasisPath), usize> =
        target.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mat = boundary_matrix(x, y, hg, &source, &target);
    let mut rhs = vec![false; target.len()];
    for (s, d, l) in f.entries() {
        for &t in l.terms() {
            rhs[tix[&(s, d, t)]] = true;
        }
    }
    Ok(mat.solve(&rhs).map(|sol| {
        let mut h = MorElem::zero(hg);
        for (c, &(s, d, p)) in source.iter().enumerate() {
            if sol[c] {
                h.add_entry(s, d, AlgElem::from_path(p));
            }
        }
        h
    }))
}

pub fn is_nullhomotopic(f: &MorElem, x: &TypeD, y: &TypeD) -> Result<bool, TypedError> {
    null_homotopy(f, x, y).map(|w| w.is_some())
}

#[derive(Clone, Copy, Debug)]
pub struct HomologyWindow {
    /// Consecutive zero-homology rows required to declare stabilization.
    pub band: usize,
    /// Hard limit on rows examined below the top of the support.
    pub cap: usize,
}

impl Default for HomologyWindow {
    fn default() -> Self {
        HomologyWindow { band: 4, cap: 64 }
    }
}

/// Bigraded homology of `Mor(X, Y)` over a certified δ-window.
///
/// `dims` lists the nonzero dimensions with `2δ` inside `window`
/// (inclusive); nothing is claimed below the window. `stabilized` means
/// the window's bottom `band` rows were all zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorHomology {
    pub dims: BTreeMap<Bigrading, usize>,
    pub window: (i32, i32),
    pub stabilized: bool,
}

impl MorHomology {
    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    /// Total dimension per 2δ row.
    pub fn rows(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (g, &d) in &self.dims {
            *out.entry(g.delta2).or_insert(0) += d;
        }
        out
    }

    /// Dimensions re-keyed relative to the largest nonzero row, for
    /// comparing tables that only agree up to an overall δ-shift.
    pub fn normalized_dims(&self) -> BTreeMap<Bigrading, usize> {
        let Some(top) = self.dims.iter().filter(|(_, &d)| d > 0).map(|(g, _)| *g).max() else {
            return BTreeMap::new();
        };
        self.dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(g, &d)| (*g - top, d))
            .collect()
    }
}

pub fn mor_homology(x: &TypeD, y: &TypeD, win: HomologyWindow) -> MorHomology {
    let bases: Vec<Bigrading> = x
        .gens()
        .iter()
        .flat_map(|gx| y.gens().iter().map(move |gy| gy.gr - gx.gr))
        .collect();
    let Some(d2max) = bases.iter().map(|b| b.delta2).max() else {
        return MorHomology { dims: BTreeMap::new(), window: (0, 0), stabilized: true };
    };

    let mut depth = win.band + 8;
    loop {
        depth = depth.min(win.cap.max(win.band + 2));
        let floor = d2max - depth as i32;

        // Chain-group bases for every degree in the slab.
        let mut basis: BTreeMap<Bigrading, Vec<(usize, usize, BasisPath)>> = BTreeMap::new();
        for base in &bases {
            let mut n = 0;
            while base.delta2 - n >= floor {
                let g = *base - Bigrading::new(n, n);
                basis.entry(g).or_default();
                n += 1;
            }
        }
        for (g, v) in basis.iter_mut() {
            *v = mor_basis(x, y, *g);
        }
        basis.retain(|_, v| !v.is_empty());

        // Rank of the outgoing differential wherever the target row is
        // still inside the slab.
        let empty: Vec<(usize, usize, BasisPath)> = Vec::new();
        let mut rank_out: BTreeMap<Bigrading, usize> = BTreeMap::new();
        for (g, src) in &basis {
            if g.delta2 < floor + 2 {
                continue;
            }
            let tgt = basis.get(&(*g + ARROW_DEGREE)).unwrap_or(&empty);
            rank_out.insert(*g, boundary_matrix(x, y, *g, src, tgt).rank());
        }

        let mut dims: BTreeMap<Bigrading, usize> = BTreeMap::new();
        for (g, b) in &basis {
            if g.delta2 < floor + 2 {
                continue;
            }
            let out = rank_out.get(g).copied().unwrap_or(0);
            let into = rank_out.get(&(*g - ARROW_DEGREE)).copied().unwrap_or(0);
            let h = b.len() - out - into;
            if h > 0 {
                dims.insert(*g, h);
            }
        }

        let mut rows: BTreeMap<i32, usize> = ((floor + 2)..=d2max).map(|r| (r, 0)).collect();
        for (g, &d) in &dims {
            *rows.get_mut(&g.delta2).unwrap() += d;
        }
        // Zero rows only count toward the band once homology has
        // appeared; the hull of an unreduced complex can pad the top
        // with rows that vanish for trivial reasons.
        let mut run = 0;
        let mut seen = false;
        for (&r, &total) in rows.iter().rev() {
            if total == 0 {
                if seen {
                    run += 1;
                    if run == win.band {
                        let window = (r, d2max);
                        dims.retain(|g, _| g.delta2 >= r);
                        return MorHomology { dims, window, stabilized: true };
                    }
                }
            } else {
                seen = true;
                run = 0;
            }
        }

        if depth >= win.cap {
            return MorHomology { dims, window: (floor + 2, d2max), stabilized: false };
        }
        depth *= 2;
    }
}
