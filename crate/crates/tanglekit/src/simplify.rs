//! Homotopy simplification: cancelling identity-labeled arrows (with the
//! induced projection/inclusion maps), full reduction, base changes by
//! degree-0 endomorphisms, a greedy label straightener, and direct-sum
//! decomposition into indecomposable summands.

use crate::algebra::{AlgElem, BasisPath, Bigrading, Idem, PathKind};
use crate::f2::BitMat;
use crate::hom::{boundary_matrix, mor_basis};
use crate::typed::{MorElem, TypeD, ARROW_DEGREE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Outcome of a simplification `X → Z`: the smaller complex plus the
/// degree-0 homotopy equivalences relating it to the input.
/// `project ∘ include = id_Z` exactly.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub complex: TypeD,
    /// Chain map `X → Z`.
    pub project: MorElem,
    /// Chain map `Z → X`.
    pub include: MorElem,
}

pub fn identity_mor(x: &TypeD) -> MorElem {
    let mut f = MorElem::zero(Bigrading::ZERO);
    for (i, g) in x.gens().iter().enumerate() {
        f.add_entry(i, i, AlgElem::from_path(crate::algebra::BasisPath::unit(g.idem)));
    }
    f
}

fn has_unit_term(l: &AlgElem) -> bool {
    l.terms().iter().any(|t| t.kind == PathKind::Unit)
}

/// Cancels the arrow `x → y`, which must be labeled by exactly the
/// idempotent. For every pair `z₁ → y` (label `a`) and `x → z₂` (label
/// `b`) the product `mul(b, a)` is added to the arrow `z₁ → z₂`.
pub fn cancel_arrow(complex: &TypeD, x: usize, y: usize) -> Reduction {
    assert_ne!(x, y, "cannot cancel a self-arrow");
    let label = complex.arrow(x, y);
    assert_eq!(
        label.terms().len(),
        1,
        "cancelled arrow must be identity-labeled, found {label}"
    );
    assert_eq!(label.terms()[0].kind, PathKind::Unit, "cancelled arrow must be identity-labeled");

    let n = complex.gen_count();
    let mut newix = vec![usize::MAX; n];
    let mut z = TypeD::new();
    for (i, g) in complex.gens().iter().enumerate() {
        if i != x && i != y {
            newix[i] = z.add_gen(g.id.clone(), g.idem, g.gr);
        }
    }

    let into_y: Vec<(usize, AlgElem)> = complex
        .arrows()
        .filter(|&(s, d, _)| d == y && s != x)
        .map(|(s, _, l)| (s, l.clone()))
        .collect();
    let from_x: Vec<(usize, AlgElem)> =
        complex.arrows_from(x).filter(|&(d, _)| d != y).map(|(d, l)| (d, l.clone())).collect();

    for (s, d, l) in complex.arrows() {
        if s != x && s != y && d != x && d != y {
            z.add_arrow(newix[s], newix[d], l.clone());
        }
    }
    for (z1, a) in &into_y {
        for (z2, b) in &from_x {
            z.add_arrow(newix[*z1], newix[*z2], b.mul(a));
        }
    }

    let mut project = MorElem::zero(Bigrading::ZERO);
    let mut include = MorElem::zero(Bigrading::ZERO);
    for (i, g) in complex.gens().iter().enumerate() {
        if i != x && i != y {
            let unit = AlgElem::from_path(crate::algebra::BasisPath::unit(g.idem));
            project.add_entry(i, newix[i], unit.clone());
            include.add_entry(newix[i], i, unit);
        }
    }
    // y projects through the arrows leaving x; generators over y include
    // back into x through the arrows entering y.
    for (z2, b) in &from_x {
        project.add_entry(y, newix[*z2], b.clone());
    }
    for (z1, a) in &into_y {
        include.add_entry(newix[*z1], x, a.clone());
    }

    Reduction { complex: z, project, include }
}

/// Cancels identity-labeled arrows, always the first in generator order,
/// until none remain. Deterministic; the result has no identity labels.
pub fn reduce(complex: &TypeD) -> Reduction {
    let mut cur = complex.clone();
    let mut project = identity_mor(complex);
    let mut include = identity_mor(complex);
    loop {
        let Some((x, y)) = cur
            .arrows()
            .find(|(_, _, l)| has_unit_term(l))
            .map(|(s, d, _)| (s, d))
        else {
            return Reduction { complex: cur, project, include };
        };
        let step = cancel_arrow(&cur, x, y);
        project = step.project.compose(&project);
        include = include.compose(&step.include);
        cur = step.complex;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BaseChangeError {
    #[error("base change must have degree (q=0, 2d=0), got {0}")]
    Degree(Bigrading),
    #[error("base change must square to zero")]
    NotNilpotent,
}

/// Conjugates the differential by `id + g` for a degree-0 endomorphism
/// `g` with `g² = 0`: the result is isomorphic to the input with
/// differential `δ + gδ + δg + gδg`.
pub fn base_change(complex: &TypeD, g: &MorElem) -> Result<TypeD, BaseChangeError> {
    if g.gr != Bigrading::ZERO {
        return Err(BaseChangeError::Degree(g.gr));
    }
    if !g.compose(g).is_zero() {
        return Err(BaseChangeError::NotNilpotent);
    }
    let mut delta = MorElem::zero(Bigrading::new(0, -2));
    for (s, d, l) in complex.arrows() {
        delta.add_entry(s, d, l.clone());
    }
    let gd = g.compose(&delta);
    let dg = delta.compose(g);
    let gdg = g.compose(&delta).compose(g);
    let new_delta = delta.add(&gd).add(&dg).add(&gdg);

    let mut out = TypeD::new();
    for gen in complex.gens() {
        out.add_gen(gen.id.clone(), gen.idem, gen.gr);
    }
    for (s, d, l) in new_delta.entries() {
        out.add_arrow(s, d, l.clone());
    }
    Ok(out)
}

fn complexity(x: &TypeD) -> (usize, usize) {
    let mut terms = 0;
    let mut length = 0;
    for (_, _, l) in x.arrows() {
        terms += l.terms().len();
        for t in l.terms() {
            length += t.kind.len() as usize;
        }
    }
    (terms, length)
}

/// Greedy arrow-label simplification by single-entry degree-0 base
/// changes: tries every candidate `u ↦ v ⊗ p` off the diagonal and keeps
/// any that strictly lowers the total term count (then total length).
pub fn straighten(complex: &TypeD) -> TypeD {
    let mut cur = complex.clone();
    let cap = 4 * complex.gen_count() * complex.gen_count() + 16;
    for _ in 0..cap {
        let mut improved = false;
        let score = complexity(&cur);
        for (u, v, p) in mor_basis(&cur, &cur, Bigrading::ZERO) {
            if u == v {
                continue;
            }
            let mut g = MorElem::zero(Bigrading::ZERO);
            g.add_entry(u, v, AlgElem::from_path(p));
            let cand = base_change(&cur, &g).expect("single off-diagonal entry is nilpotent");
            if complexity(&cand) < score {
                cur = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            return cur;
        }
    }
    cur
}

/// The connected components as standalone complexes.
pub fn split_components(complex: &TypeD) -> Vec<TypeD> {
    complex.component_indices().into_iter().map(|ix| complex.restrict(&ix)).collect()
}

// ---------------------------------------------------------------------------
// Direct-sum decomposition
//
// A reduced complex can be a direct sum without looking like one: a base
// change may entangle the summands so that the arrow graph is connected.
// Splitting it back is exact idempotent splitting. Any nontrivial
// idempotent chain endomorphism e is conjugated (by the explicit
// invertible u = id + s + e, where s is the identity-labeled part of e)
// into a scalar projector, the projector is diagonalized block by block,
// and the commuting differential then has no arrows across the diagonal
// split.

fn delta_mor(x: &TypeD) -> MorElem {
    let mut d = MorElem::zero(ARROW_DEGREE);
    for (s, t, l) in x.arrows() {
        d.add_entry(s, t, l.clone());
    }
    d
}

/// The identity-labeled entries of a degree-0 endomorphism. Taking them
/// is an algebra map: a product of paths is a unit only if both factors
/// are.
fn unit_part(x: &TypeD, f: &MorElem) -> MorElem {
    let mut out = MorElem::zero(Bigrading::ZERO);
    for (s, d, l) in f.entries() {
        if has_unit_term(l) {
            out.add_entry(s, d, AlgElem::from_path(BasisPath::unit(x.gens()[s].idem)));
        }
    }
    out
}

/// Inverse of `id + n` with `n` nilpotent. Entries of strictly negative
/// path degree raise the generator q-grading, so the series is finite.
fn invert_unipotent(x: &TypeD, u: &MorElem) -> MorElem {
    let one = identity_mor(x);
    let n = u.add(&one);
    let mut inv = one.clone();
    let mut term = one;
    for _ in 0..x.gen_count() + 2 {
        term = n.compose(&term);
        if term.is_zero() {
            return inv;
        }
        inv = inv.add(&term);
    }
    panic!("morphism is not unipotent");
}

fn endo_coords(f: &MorElem, index: &BTreeMap<(usize, usize, BasisPath), usize>) -> Vec<bool> {
    let mut v = vec![false; index.len()];
    for (s, d, l) in f.entries() {
        for &t in l.terms() {
            v[index[&(s, d, t)]] = true;
        }
    }
    v
}

fn combine(v: &[bool], basis: &[(usize, usize, BasisPath)]) -> MorElem {
    let mut f = MorElem::zero(Bigrading::ZERO);
    for (i, &(s, d, p)) in basis.iter().enumerate() {
        if v[i] {
            f.add_entry(s, d, AlgElem::from_path(p));
        }
    }
    f
}

/// Idempotents in the span of `id, t, t², …` other than 0 and the
/// identity. On this commutative subalgebra squaring is linear over F₂,
/// so the idempotents are exactly the kernel of `v ↦ v² + v`.
fn idempotent_in_powers(
    t: &MorElem,
    index: &BTreeMap<(usize, usize, BasisPath), usize>,
    one: &MorElem,
) -> Option<MorElem> {
    let m = index.len();
    let mut pows: Vec<MorElem> = vec![one.clone()];
    let mut rows: Vec<Vec<bool>> = vec![endo_coords(one, index)];
    loop {
        let next = t.compose(pows.last().unwrap());
        rows.push(endo_coords(&next, index));
        let mut mat = BitMat::zero(rows.len(), m);
        for (r, row) in rows.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                if b {
                    mat.flip(r, c);
                }
            }
        }
        if (mat.rank()) < rows.len() {
            rows.pop();
            break;
        }
        pows.push(next);
        if pows.len() > m {
            break;
        }
    }
    let d = pows.len();
    let mut l = BitMat::zero(m, d);
    for (i, p) in pows.iter().enumerate() {
        let obstruction = p.compose(p).add(p);
        for (r, &b) in endo_coords(&obstruction, index).iter().enumerate() {
            if b {
                l.flip(r, i);
            }
        }
    }
    for v in l.nullspace() {
        let mut e = MorElem::zero(Bigrading::ZERO);
        for (i, &b) in v.iter().enumerate() {
            if b {
                e = e.add(&pows[i]);
            }
        }
        if !e.is_zero() && e != *one {
            debug_assert_eq!(e.compose(&e), e);
            return Some(e);
        }
    }
    None
}

/// Searches the chain endomorphisms of `x` for a nontrivial exact
/// idempotent. Candidates are the cycle basis, pairwise sums, and a
/// fixed batch of seeded random combinations; deterministic.
fn find_idempotent(x: &TypeD) -> Option<MorElem> {
    let basis = mor_basis(x, x, Bigrading::ZERO);
    let target = mor_basis(x, x, ARROW_DEGREE);
    let mat = boundary_matrix(x, x, Bigrading::ZERO, &basis, &target);
    let cycles: Vec<MorElem> = mat.nullspace().iter().map(|v| combine(v, &basis)).collect();
    if cycles.len() <= 1 {
        return None;
    }
    let index: BTreeMap<(usize, usize, BasisPath), usize> =
        basis.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let one = identity_mor(x);

    let mut candidates: Vec<MorElem> = cycles.clone();
    if cycles.len() <= 12 {
        for i in 0..cycles.len() {
            for j in i + 1..cycles.len() {
                candidates.push(cycles[i].add(&cycles[j]));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let mut f = MorElem::zero(Bigrading::ZERO);
        for c in &cycles {
            if rng.gen::<bool>() {
                f = f.add(c);
            }
        }
        candidates.push(f);
    }

    candidates
        .iter()
        .filter(|t| !t.is_zero())
        .find_map(|t| idempotent_in_powers(t, &index, &one))
}

/// Conjugates a scalar idempotent into a literal diagonal projector.
/// Returns `(p, p⁻¹, keep)` with `p ∘ d ∘ p⁻¹` diagonal, supported
/// exactly on the generators with `keep` set.
fn diagonalize_projector(x: &TypeD, d: &MorElem) -> (MorElem, MorElem, Vec<bool>) {
    let n = x.gen_count();
    let mut blocks: BTreeMap<(Idem, Bigrading), Vec<usize>> = BTreeMap::new();
    for (i, g) in x.gens().iter().enumerate() {
        blocks.entry((g.idem, g.gr)).or_default().push(i);
    }

    // Row convention: a scalar endomorphism acts on row vectors of
    // generator coordinates, entry (s, t) mapping s into t. For an
    // idempotent M the row space and the left kernel are complementary;
    // listing bases of both as the rows of Q conjugugates M to a diagonal
    // projector Q M Q⁻¹.
    let mut q = vec![vec![false; n]; n];
    let mut keep = vec![false; n];
    for bs in blocks.values() {
        let b = bs.len();
        let mm: Vec<Vec<bool>> = bs
            .iter()
            .map(|&s| bs.iter().map(|&t| !d.entry(s, t).is_zero()).collect())
            .collect();
        let im = row_space_basis(&mm);
        let mut ker_mat = BitMat::zero(b, b);
        for (i, row) in mm.iter().enumerate() {
            for (j, &bit) in row.iter().enumerate() {
                if bit {
                    ker_mat.flip(j, i);
                }
            }
        }
        let ker = ker_mat.nullspace();
        assert_eq!(im.len() + ker.len(), b, "scalar part is not idempotent");
        for (r, row) in im.iter().chain(ker.iter()).enumerate() {
            for (c, &bit) in row.iter().enumerate() {
                q[bs[r]][bs[c]] = bit;
            }
            if r < im.len() {
                keep[bs[r]] = true;
            }
        }
    }

    let qinv = invert_bool(&q);
    let to_mor = |mat: &[Vec<bool>]| {
        let mut f = MorElem::zero(Bigrading::ZERO);
        for (i, row) in mat.iter().enumerate() {
            for (j, &bit) in row.iter().enumerate() {
                if bit {
                    f.add_entry(i, j, AlgElem::from_path(BasisPath::unit(x.gens()[i].idem)));
                }
            }
        }
        f
    };
    // Function application composes matrices source-first, so the outer
    // conjugator p takes Q⁻¹ and p⁻¹ takes Q.
    let p = to_mor(&qinv);
    let p_inv = to_mor(&q);
    debug_assert_eq!(p.compose(&p_inv), identity_mor(x));
    (p, p_inv, keep)
}

/// Basis of the span of the rows of an F₂ matrix.
fn row_space_basis(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let mut rows: Vec<Vec<bool>> = m.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] {
                let pivot = rows[rank].clone();
                for (a, &b) in rows[r].iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

fn invert_bool(q: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = q.len();
    let mut a: Vec<Vec<bool>> = q.to_vec();
    let mut inv: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c]).expect("matrix is invertible");
        a.swap(c, p);
        inv.swap(c, p);
        for r in 0..n {
            if r != c && a[r][c] {
                let (pa, pi) = (a[c].clone(), inv[c].clone());
                for (x, &b) in a[r].iter_mut().zip(&pa) {
                    *x ^= b;
                }
                for (x, &b) in inv[r].iter_mut().zip(&pi) {
                    *x ^= b;
                }
            }
        }
    }
    inv
}

/// One exact splitting step off a nontrivial idempotent chain
/// endomorphism, if one can be found.
fn split_by_idempotent(x: &TypeD) -> Option<(TypeD, TypeD)> {
    let e = find_idempotent(x)?;
    let one = identity_mor(x);
    let s = unit_part(x, &e);
    // u e = s u, both sides reducing to s ∘ e over F₂, so conjugation by
    // u replaces e with its scalar part exactly.
    let u = one.add(&s).add(&e);
    let u_inv = invert_unipotent(x, &u);
    debug_assert_eq!(u.compose(&u_inv), one);
    debug_assert_eq!(u.compose(&e).compose(&u_inv), s);
    let delta1 = u.compose(&delta_mor(x)).compose(&u_inv);

    let (p, p_inv, keep) = diagonalize_projector(x, &s);
    let delta2 = p.compose(&delta1).compose(&p_inv);

    let mut y = TypeD::new();
    for g in x.gens() {
        y.add_gen(g.id.clone(), g.idem, g.gr);
    }
    for (s, d, l) in delta2.entries() {
        assert_eq!(keep[s], keep[d], "differential does not respect the projector");
        y.add_arrow(s, d, l.clone());
    }
    debug_assert!(y.check().is_ok());
    let a: Vec<usize> = (0..y.gen_count()).filter(|&i| keep[i]).collect();
    let b: Vec<usize> = (0..y.gen_count()).filter(|&i| !keep[i]).collect();
    assert!(!a.is_empty() && !b.is_empty(), "idempotent split is trivial");
    Some((y.restrict(&a), y.restrict(&b)))
}

/// Decomposition into indecomposable direct summands, coarsest first by
/// generator count. Reduces, splits connected components, and then
/// splits off idempotent chain endomorphisms until none are found.
pub fn decompose(complex: &TypeD) -> Vec<TypeD> {
    let mut queue = vec![reduce(complex).complex];
    let mut done = Vec::new();
    while let Some(c) = queue.pop() {
        if c.gen_count() == 0 {
            continue;
        }
        let parts = split_components(&c);
        if parts.len() > 1 {
            queue.extend(parts);
            continue;
        }
        match split_by_idempotent(&c) {
            Some((a, b)) => {
                queue.push(a);
                queue.push(b);
            }
            None => done.push(c),
        }
    }
    done.sort_by_key(|c| {
        (c.gen_count(), c.gens().first().map(|g| g.id.clone()).unwrap_or_default())
    });
    done
}
