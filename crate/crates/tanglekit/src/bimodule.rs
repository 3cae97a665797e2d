//! Type AD bimodules over the quiver algebra and the box tensor product
//! with a type D structure.
//!
//! Action inputs are written in the H-power basis `{H^k, D·H^k, S·H^k}`
//! (plus `S²·H^k` on the output side) and are stored latest-consumed
//! first, matching the order they are usually notated. A path
//! `x₀ → x₁ → … → x_j` feeds its first arrow to the last stored input.
//! The output exponent is always the sum of the matched input exponents.
//!
//! Pairing convention: a box-tensor generator `(x, m)` requires
//! `idem(x) = left(m)` and carries idempotent `right(m)`. Bigrading
//! offsets per bimodule generator are solved from homogeneity of the
//! actions at construction time, so box-tensor output is absolutely
//! graded once the input is.

use crate::algebra::{AlgElem, BasisPath, Bigrading, Idem, PathKind};
use crate::typed::TypeD;
use std::collections::BTreeMap;

/// One tensor factor pattern: `S·H^k`, `H^k`, `D·H^k` or `S²·H^k`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HPat {
    SH,
    H,
    DH,
    S2H,
}

impl HPat {
    fn flips(self) -> bool {
        matches!(self, HPat::SH)
    }

    fn apply(self, i: Idem) -> Idem {
        if self.flips() {
            i.other()
        } else {
            i
        }
    }

    /// Bigrading at exponent zero; each exponent step adds `(−2,−2)`.
    fn gr0(self) -> Bigrading {
        match self {
            HPat::SH => Bigrading::new(-1, -1),
            HPat::H => Bigrading::ZERO,
            HPat::DH | HPat::S2H => Bigrading::new(-2, -2),
        }
    }

    /// The concrete algebra element at exponent `k` with the given right
    /// idempotent.
    pub fn eval(self, k: u32, right: Idem) -> AlgElem {
        match self {
            HPat::SH => AlgElem::from_path(BasisPath::s(2 * k + 1, right)),
            HPat::DH => AlgElem::from_path(BasisPath::d(k + 1, right)),
            HPat::S2H => AlgElem::from_path(BasisPath::s(2 * k + 2, right)),
            HPat::H => {
                if k == 0 {
                    AlgElem::from_path(BasisPath::unit(right))
                } else {
                    AlgElem::from_paths([BasisPath::d(k, right), BasisPath::s(2 * k, right)])
                }
            }
        }
    }
}

/// H-power basis decomposition of one basis path: `ι = H⁰`,
/// `S^{2k+1} = S·H^k`, `S^{2k} = H^k + D·H^{k−1}`, `D^k = D·H^{k−1}`.
pub fn decompose(p: BasisPath) -> Vec<(HPat, u32)> {
    match p.kind {
        PathKind::Unit => vec![(HPat::H, 0)],
        PathKind::S(n) if n % 2 == 1 => vec![(HPat::SH, n / 2)],
        PathKind::S(n) => vec![(HPat::H, n / 2), (HPat::DH, n / 2 - 1)],
        PathKind::D(n) => vec![(HPat::DH, n - 1)],
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BGen {
    pub name: String,
    pub left: Idem,
    pub right: Idem,
    pub offset: Bigrading,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Action {
    pub src: usize,
    pub dst: usize,
    /// Latest-consumed first; empty for pure differentials.
    pub inputs: Vec<HPat>,
    pub out: HPat,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ADBimodule {
    pub name: String,
    bgens: Vec<BGen>,
    actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BimoduleError {
    #[error("{bimodule}: action #{index} breaks the input idempotent chain")]
    InputChain { bimodule: String, index: usize },
    #[error("{bimodule}: action #{index} breaks the output idempotent rule")]
    OutputIdem { bimodule: String, index: usize },
    #[error("{bimodule}: grading offsets are inconsistent at action #{index}")]
    OffsetConflict { bimodule: String, index: usize },
}

impl ADBimodule {
    /// Builds the bimodule and solves the per-generator grading offsets
    /// from homogeneity of the actions (unique up to a shift per
    /// connected component; the first generator of each is pinned to 0).
    pub fn new(
        name: impl Into<String>,
        bgens: Vec<(&str, Idem, Idem)>,
        actions: Vec<Action>,
    ) -> Result<ADBimodule, BimoduleError> {
        let name = name.into();
        let mut out = ADBimodule {
            name: name.clone(),
            bgens: bgens
                .into_iter()
                .map(|(n, l, r)| BGen { name: n.to_string(), left: l, right: r, offset: Bigrading::ZERO })
                .collect(),
            actions,
        };

        for (index, a) in out.actions.iter().enumerate() {
            let (src, dst) = (&out.bgens[a.src], &out.bgens[a.dst]);
            let mut cur = src.left;
            for pat in a.inputs.iter().rev() {
                cur = pat.apply(cur);
            }
            if cur != dst.left {
                return Err(BimoduleError::InputChain { bimodule: name, index });
            }
            if a.out.apply(src.right) != dst.right {
                return Err(BimoduleError::OutputIdem { bimodule: name, index });
            }
        }

        // o(dst) − o(src) = (0, 2j−2) + Σ gr₀(inputs) − gr₀(out).
        let mut known = vec![false; out.bgens.len()];
        loop {
            let seed = match known.iter().position(|k| !k) {
                Some(i) => i,
                None => break,
            };
            known[seed] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for (index, a) in out.actions.iter().enumerate() {
                    let j = a.inputs.len() as i32;
                    let step = Bigrading::new(0, 2 * j - 2)
                        + a.inputs.iter().fold(Bigrading::ZERO, |acc, p| acc + p.gr0())
                        - a.out.gr0();
                    match (known[a.src], known[a.dst]) {
                        (true, false) => {
                            let o = out.bgens[a.src].offset + step;
                            out.bgens[a.dst].offset = o;
                            known[a.dst] = true;
                            changed = true;
                        }
                        (false, true) => {
                            let o = out.bgens[a.dst].offset - step;
                            out.bgens[a.src].offset = o;
                            known[a.src] = true;
                            changed = true;
                        }
                        (true, true) => {
                            if out.bgens[a.dst].offset - out.bgens[a.src].offset != step {
                                return Err(BimoduleError::OffsetConflict {
                                    bimodule: out.name,
                                    index,
                                });
                            }
                        }
                        (false, false) => {}
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn bgens(&self) -> &[BGen] {
        &self.bgens
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// The same table with every idempotent flipped.
    pub fn swapped(&self, name: impl Into<String>) -> ADBimodule {
        ADBimodule::new(
            name,
            self.bgens
                .iter()
                .map(|b| (b.name.as_str(), b.left.other(), b.right.other()))
                .collect(),
            self.actions.clone(),
        )
        .expect("idempotent swap preserves validity")
    }

    /// The reversed bimodule: every action runs backwards, with its input
    /// tensor order reversed. Pairing against it realizes the dual:
    /// `box(dual X, rev B) ≅ dual(box(X, B))`.
    pub fn reversed(&self, name: impl Into<String>) -> ADBimodule {
        ADBimodule::new(
            name,
            self.bgens.iter().map(|b| (b.name.as_str(), b.left, b.right)).collect(),
            self.actions
                .iter()
                .map(|a| Action {
                    src: a.dst,
                    dst: a.src,
                    inputs: a.inputs.iter().rev().copied().collect(),
                    out: a.out,
                })
                .collect(),
        )
        .expect("reversal preserves validity")
    }
}

/// `X ⊠ B`: generators `(x, m)` with `idem(x) = left(m)`, one output
/// arrow per action whose input patterns match a directed label path.
pub fn box_tensor(x: &TypeD, b: &ADBimodule) -> TypeD {
    let mut out = TypeD::new();
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (xi, xg) in x.gens().iter().enumerate() {
        for (mi, m) in b.bgens.iter().enumerate() {
            if xg.idem == m.left {
                let ix = out.add_gen(format!("{}|{}", xg.id, m.name), m.right, xg.gr + m.offset);
                index.insert((xi, mi), ix);
            }
        }
    }

    // arrows out of each generator as (dst, term, exponent-decomposition)
    let mut steps: Vec<Vec<(usize, Vec<(HPat, u32)>)>> = vec![Vec::new(); x.gen_count()];
    for (s, d, l) in x.arrows() {
        for &t in l.terms() {
            steps[s].push((d, decompose(t)));
        }
    }

    for a in &b.actions {
        let right = b.bgens[a.src].right;
        for (&(xi, mi), &src_ix) in &index {
            if mi != a.src {
                continue;
            }
            match a.inputs.len() {
                0 => {
                    if let Some(&dst_ix) = index.get(&(xi, a.dst)) {
                        out.add_arrow(src_ix, dst_ix, a.out.eval(0, right));
                    }
                }
                1 => {
                    for (x1, dec) in &steps[xi] {
                        for &(pat, k) in dec {
                            if pat == a.inputs[0] {
                                if let Some(&dst_ix) = index.get(&(*x1, a.dst)) {
                                    out.add_arrow(src_ix, dst_ix, a.out.eval(k, right));
                                }
                            }
                        }
                    }
                }
                2 => {
                    for (x1, dec1) in &steps[xi] {
                        for (x2, dec2) in &steps[*x1] {
                            for &(p1, k1) in dec1 {
                                if p1 != a.inputs[1] {
                                    continue;
                                }
                                for &(p2, k2) in dec2 {
                                    if p2 != a.inputs[0] {
                                        continue;
                                    }
                                    if let Some(&dst_ix) = index.get(&(*x2, a.dst)) {
                                        out.add_arrow(src_ix, dst_ix, a.out.eval(k1 + k2, right));
                                    }
                                }
                            }
                        }
                    }
                }
                n => unreachable!("actions with {n} inputs are not used"),
            }
        }
    }
    out
}

/// The identity bimodule: `box(X, id) ≅ X` generator for generator.
pub fn identity_bimodule() -> ADBimodule {
    use HPat::{DH, H, SH};
    use Idem::{Filled, Hollow};
    let one = |src, dst, p| Action { src, dst, inputs: vec![p], out: p };
    ADBimodule::new(
        "id",
        vec![("i", Filled, Filled), ("o", Hollow, Hollow)],
        vec![
            one(0, 0, H),
            one(0, 0, DH),
            one(1, 1, H),
            one(1, 1, DH),
            one(0, 1, SH),
            one(1, 0, SH),
        ],
    )
    .expect("identity bimodule is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typed::{central_action, cone, CentralElem};
    use Idem::{Filled, Hollow};

    fn el(s: &str) -> AlgElem {
        s.parse().unwrap()
    }

    fn sample_complexes() -> Vec<TypeD> {
        let mut r1 = TypeD::new();
        let a = r1.add_gen("a", Filled, Bigrading::new(-1, 1));
        let b = r1.add_gen("b", Filled, Bigrading::new(1, 1));
        r1.add_arrow(a, b, el("D^1.+S^2."));

        let mut mixed = TypeD::new();
        let p = mixed.add_gen("p", Filled, Bigrading::new(0, 2));
        let q = mixed.add_gen("q", Hollow, Bigrading::new(1, 1));
        let r = mixed.add_gen("r", Filled, Bigrading::new(-2, 0));
        mixed.add_arrow(p, q, el("S^1."));
        mixed.add_arrow(r, q, el("S^3."));

        let pt = {
            let mut x = TypeD::new();
            x.add_gen("z", Hollow, Bigrading::ZERO);
            x
        };
        vec![r1, mixed, pt]
    }

    #[test]
    fn decompose_matches_the_h_basis() {
        let p = BasisPath::s(4, Filled);
        assert_eq!(decompose(p), vec![(HPat::H, 2), (HPat::DH, 1)]);
        // Recombining the decomposition yields the original path.
        let back = decompose(p)
            .into_iter()
            .fold(AlgElem::zero(), |acc, (pat, k)| acc.add(&pat.eval(k, Filled)));
        assert_eq!(back, AlgElem::from_path(p));
        for n in 1..8 {
            for idem in [Filled, Hollow] {
                for path in [BasisPath::s(n, idem), BasisPath::d(n, idem)] {
                    let back = decompose(path)
                        .into_iter()
                        .fold(AlgElem::zero(), |acc, (pat, k)| acc.add(&pat.eval(k, idem)));
                    assert_eq!(back, AlgElem::from_path(path), "{path}");
                }
            }
        }
    }

    #[test]
    fn identity_bimodule_acts_trivially() {
        let id = identity_bimodule();
        for x in sample_complexes() {
            x.check().unwrap();
            let y = box_tensor(&x, &id);
            y.check().unwrap();
            assert_eq!(y.gen_count(), x.gen_count());
            for (i, g) in x.gens().iter().enumerate() {
                let j = y.gen_index(&format!("{}|{}", g.id, if g.idem == Filled { "i" } else { "o" })).unwrap();
                assert_eq!(y.gens()[j].idem, g.idem);
                assert_eq!(y.gens()[j].gr, g.gr);
                let _ = (i, j);
            }
            // arrows carry over label by label
            for (s, d, l) in x.arrows() {
                let sfx = |g: &crate::typed::Generator| if g.idem == Filled { "i" } else { "o" };
                let ys = y.gen_index(&format!("{}|{}", x.gens()[s].id, sfx(&x.gens()[s]))).unwrap();
                let yd = y.gen_index(&format!("{}|{}", x.gens()[d].id, sfx(&x.gens()[d]))).unwrap();
                assert_eq!(&y.arrow(ys, yd), l);
            }
        }
    }

    #[test]
    fn identity_survives_reversal_and_swap() {
        let id = identity_bimodule();
        for x in sample_complexes() {
            let y = box_tensor(&x, &id.reversed("id'"));
            y.check().unwrap();
            assert_eq!(y.gen_count(), x.gen_count());
            let z = box_tensor(&x, &id.swapped("id~"));
            z.check().unwrap();
            assert_eq!(z.gen_count(), x.gen_count());
        }
    }

    #[test]
    fn offsets_are_solved_from_actions() {
        // A toy bimodule exercising a nontrivial offset: a single 0-input
        // S output forces o(dst) − o(src) = (1,−1).
        let b = ADBimodule::new(
            "toy",
            vec![("u", Filled, Filled), ("v", Filled, Hollow)],
            vec![Action { src: 0, dst: 1, inputs: vec![], out: HPat::SH }],
        )
        .unwrap();
        assert_eq!(b.bgens()[0].offset, Bigrading::ZERO);
        assert_eq!(b.bgens()[1].offset, Bigrading::new(1, -1));
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let bad = ADBimodule::new(
            "bad",
            vec![("u", Filled, Filled), ("v", Filled, Hollow)],
            vec![Action { src: 0, dst: 1, inputs: vec![], out: HPat::H }],
        );
        assert!(matches!(bad, Err(BimoduleError::OutputIdem { .. })));

        let bad = ADBimodule::new(
            "bad
",
            vec![("u", Filled, Filled), ("v", Hollow, Filled)],
            vec![Action { src: 0, dst: 1, inputs: vec![HPat::H], out: HPat::H }],
        );
        assert!(matches!(bad, Err(BimoduleError::InputChain { .. })));
    }

    #[test]
    fn box_tensor_commutes_with_mapping_cones_for_the_identity() {
        let x = sample_complexes().remove(0);
        let c = cone(&central_action(CentralElem::H, &x), &x).unwrap();
        let boxed = box_tensor(&c, &identity_bimodule());
        boxed.check().unwrap();
        assert_eq!(boxed.relative_signature(), c.relative_signature());
    }
}
