//! Bigraded type D structures over the quiver algebra: labeled directed
//! graphs on generators, with the compatibility checks, mapping cones,
//! duals, central-element actions and (de)serialization.
//!
//! Conventions, fixed once and used everywhere:
//! * an arrow `(x, a, y)` satisfies `right_idem(a) = idem(x)` and
//!   `left_idem(a) = idem(y)`; composing `x → y → z` multiplies the later
//!   label on the left: `mul(label(y,z), label(x,y))`;
//! * every arrow term has degree `grading(term) + gr(dst) − gr(src)`
//!   equal to `(q, 2δ) = (0, −2)`.

use crate::algebra::{AlgElem, BasisPath, Bigrading, Idem};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Generator {
    pub id: String,
    pub idem: Idem,
    pub gr: Bigrading,
}

/// The differential arrow degree: preserves q, drops δ by one.
pub const ARROW_DEGREE: Bigrading = Bigrading { q: 0, delta2: -2 };

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TypeD {
    gens: Vec<Generator>,
    // (src index, dst index) -> label; labels never stored as zero.
    arrows: BTreeMap<(usize, usize), AlgElem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypedError {
    #[error("duplicate generator id {0:?}")]
    DuplicateId(String),
    #[error("unknown generator id {0:?}")]
    UnknownId(String),
    #[error("generator {id} has odd q−2δ (no integral homological grading)")]
    OddHomologicalGrading { id: String },
    #[error("arrow {src} -> {dst} has empty label")]
    EmptyLabel { src: String, dst: String },
    #[error("arrow {src} -> {dst} label {label} violates the idempotent rule")]
    IdemMismatch { src: String, dst: String, label: String },
    #[error("arrow {src} -> {dst} term {term} has degree {degree} (want (q=0, 2d=-2))")]
    Inhomogeneous { src: String, dst: String, term: String, degree: Bigrading },
    #[error("differential does not square to zero: component {src} -> {dst} is {value}")]
    SquareNonzero { src: String, dst: String, value: String },
    #[error("morphism is not a chain map: boundary has component {src} -> {dst} = {value}")]
    NotChainMap { src: String, dst: String, value: String },
    #[error("morphism entry {src} -> {dst} term {term} does not match the declared degree")]
    MorDegree { src: String, dst: String, term: String },
    #[error("mapping cone requires degree (q=-2, 2d=-2), got {0}")]
    ConeDegree(Bigrading),
}

impl TypeD {
    pub fn new() -> Self {
        TypeD::default()
    }

    pub fn add_gen(&mut self, id: impl Into<String>, idem: Idem, gr: Bigrading) -> usize {
        self.gens.push(Generator { id: id.into(), idem, gr });
        self.gens.len() - 1
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn gen_count(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_index(&self, id: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.id == id)
    }

    /// XOR `label` into the arrow `src -> dst` (characteristic 2).
    pub fn add_arrow(&mut self, src: usize, dst: usize, label: AlgElem) {
        if label.is_zero() {
            return;
        }
        let entry = self.arrows.entry((src, dst)).or_default();
        *entry = entry.add(&label);
        if entry.is_zero() {
            self.arrows.remove(&(src, dst));
        }
    }

    pub fn arrow(&self, src: usize, dst: usize) -> AlgElem {
        self.arrows.get(&(src, dst)).cloned().unwrap_or_default()
    }

    pub fn arrows(&self) -> impl Iterator<Item = (usize, usize, &AlgElem)> {
        self.arrows.iter().map(|(&(s, d), l)| (s, d, l))
    }

    pub fn arrows_from(&self, src: usize) -> impl Iterator<Item = (usize, &AlgElem)> {
        self.arrows
            .range((src, 0)..(src + 1, 0))
            .map(|(&(_, d), l)| (d, l))
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    /// The square of the differential as a matrix of labels; empty iff ∂²=0.
    pub fn differential_square(&self) -> BTreeMap<(usize, usize), AlgElem> {
        let mut acc: BTreeMap<(usize, usize), AlgElem> = BTreeMap::new();
        for (&(a, b), l1) in &self.arrows {
            for (c, l2) in self.arrows_from(b) {
                let prod = l2.mul(l1);
                if prod.is_zero() {
                    continue;
                }
                let entry = acc.entry((a, c)).or_default();
                *entry = entry.add(&prod);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        acc
    }

    /// Structure check: unique ids, idempotent rule, homogeneity, ∂² = 0.
    pub fn check(&self) -> Result<(), TypedError> {
        for (i, g) in self.gens.iter().enumerate() {
            if self.gens[..i].iter().any(|h| h.id == g.id) {
                return Err(TypedError::DuplicateId(g.id.clone()));
            }
            if (g.gr.q - g.gr.delta2) % 2 != 0 {
                return Err(TypedError::OddHomologicalGrading { id: g.id.clone() });
            }
        }
        for (&(s, d), label) in &self.arrows {
            let (src, dst) = (&self.gens[s], &self.gens[d]);
            if label.is_zero() {
                return Err(TypedError::EmptyLabel { src: src.id.clone(), dst: dst.id.clone() });
            }
            for &t in label.terms() {
                if t.right != src.idem || t.left() != dst.idem {
                    return Err(TypedError::IdemMismatch {
                        src: src.id.clone(),
                        dst: dst.id.clone(),
                        label: label.to_string(),
                    });
                }
                let degree = t.grading() + dst.gr - src.gr;
                if degree != ARROW_DEGREE {
                    return Err(TypedError::Inhomogeneous {
                        src: src.id.clone(),
                        dst: dst.id.clone(),
                        term: t.to_string(),
                        degree,
                    });
                }
            }
        }
        if let Some(((s, d), v)) = self.differential_square().into_iter().next() {
            return Err(TypedError::SquareNonzero {
                src: self.gens[s].id.clone(),
                dst: self.gens[d].id.clone(),
                value: v.to_string(),
            });
        }
        Ok(())
    }

    /// Copy with all generator gradings shifted by `offset` and ids
    /// suffixed by `suffix`.
    pub fn shifted(&self, offset: Bigrading, suffix: &str) -> TypeD {
        let mut out = TypeD::new();
        for g in &self.gens {
            out.add_gen(format!("{}{}", g.id, suffix), g.idem, g.gr + offset);
        }
        out.arrows = self.arrows.clone();
        out
    }

    pub fn direct_sum(parts: &[&TypeD]) -> TypeD {
        let mut out = TypeD::new();
        let mut offsets = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            offsets.push(out.gens.len());
            for g in &part.gens {
                let id = if parts.len() > 1 && parts.iter().enumerate().any(|(j, p)| j != i && p.gen_index(&g.id).is_some()) {
                    format!("{}#{}", g.id, i)
                } else {
                    g.id.clone()
                };
                out.add_gen(id, g.idem, g.gr);
            }
        }
        for (i, part) in parts.iter().enumerate() {
            for (s, d, l) in part.arrows() {
                out.add_arrow(offsets[i] + s, offsets[i] + d, l.clone());
            }
        }
        out
    }

    /// Dual complex: negated gradings, arrows reversed with reversed labels.
    /// Realizes the mirror up to an overall bigrading shift.
    pub fn dual(&self) -> TypeD {
        let mut out = TypeD::new();
        for g in &self.gens {
            out.add_gen(g.id.clone(), g.idem, -g.gr);
        }
        for (s, d, l) in self.arrows() {
            out.add_arrow(d, s, l.reverse());
        }
        out
    }

    /// Weakly connected components of the arrow graph, as generator index
    /// sets in deterministic order.
    pub fn component_indices(&self) -> Vec<Vec<usize>> {
        let n = self.gens.len();
        let mut repr: Vec<usize> = (0..n).collect();
        fn find(repr: &mut Vec<usize>, i: usize) -> usize {
            if repr[i] != i {
                let r = find(repr, repr[i]);
                repr[i] = r;
            }
            repr[i]
        }
        for (&(s, d), _) in &self.arrows {
            let (a, b) = (find(&mut repr, s), find(&mut repr, d));
            if a != b {
                repr[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut repr, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// The sub-complex spanned by `keep` (assumed arrow-closed).
    pub fn restrict(&self, keep: &[usize]) -> TypeD {
        let mut out = TypeD::new();
        let mut newix = BTreeMap::new();
        for &i in keep {
            let g = &self.gens[i];
            newix.insert(i, out.add_gen(g.id.clone(), g.idem, g.gr));
        }
        for (s, d, l) in self.arrows() {
            if let (Some(&ns), Some(&nd)) = (newix.get(&s), newix.get(&d)) {
                out.add_arrow(ns, nd, l.clone());
            }
        }
        out
    }

    /// Multiset of `(idem, gr − min pair)` after shifting the minimal
    /// `(δ2, q)` to a fixed corner; used for quick equality screens.
    pub fn relative_signature(&self) -> Vec<(Idem, Bigrading)> {
        let Some(base) = self.gens.iter().map(|g| (g.gr.delta2, g.gr.q)).min() else {
            return Vec::new();
        };
        let base = Bigrading { q: base.1, delta2: base.0 };
        let mut sig: Vec<_> = self.gens.iter().map(|g| (g.idem, g.gr - base)).collect();
        sig.sort();
        sig
    }
}

impl fmt::Display for TypeD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gens {
            writeln!(f, "{} {} {}", g.id, g.idem, g.gr)?;
        }
        for (s, d, l) in self.arrows() {
            writeln!(f, "{} --{}--> {}", self.gens[s].id, l, self.gens[d].id)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"generators":[{"id","idem","q","delta2"}],
//             "arrows":[{"src","label","dst"}]}

#[derive(Serialize, Deserialize)]
struct GenSer {
    id: String,
    idem: Idem,
    q: i32,
    delta2: i32,
}

#[derive(Serialize, Deserialize)]
struct ArrowSer {
    src: String,
    label: AlgElem,
    dst: String,
}

#[derive(Serialize, Deserialize)]
struct TypeDSer {
    generators: Vec<GenSer>,
    arrows: Vec<ArrowSer>,
}

impl Serialize for TypeD {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let out = TypeDSer {
            generators: self
                .gens
                .iter()
                .map(|g| GenSer { id: g.id.clone(), idem: g.idem, q: g.gr.q, delta2: g.gr.delta2 })
                .collect(),
            arrows: self
                .arrows()
                .map(|(s, d, l)| ArrowSer {
                    src: self.gens[s].id.clone(),
                    label: l.clone(),
                    dst: self.gens[d].id.clone(),
                })
                .collect(),
        };
        out.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TypeD {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = TypeDSer::deserialize(de)?;
        let mut out = TypeD::new();
        for g in raw.generators {
            out.add_gen(g.id, g.idem, Bigrading::new(g.q, g.delta2));
        }
        for a in raw.arrows {
            let s = out
                .gen_index(&a.src)
                .ok_or_else(|| serde::de::Error::custom(TypedError::UnknownId(a.src.clone())))?;
            let d = out
                .gen_index(&a.dst)
                .ok_or_else(|| serde::de::Error::custom(TypedError::UnknownId(a.dst.clone())))?;
            out.add_arrow(s, d, a.label);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Morphisms

/// A homogeneous element of `Mor(X, Y)`: entries `(x in X, label, y in Y)`
/// obeying the same idempotent rule as arrows, all of the declared degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MorElem {
    pub gr: Bigrading,
    entries: BTreeMap<(usize, usize), AlgElem>,
}

impl MorElem {
    pub fn zero(gr: Bigrading) -> Self {
        MorElem { gr, entries: BTreeMap::new() }
    }

    pub fn add_entry(&mut self, src: usize, dst: usize, label: AlgElem) {
        if label.is_zero() {
            return;
        }
        let e = self.entries.entry((src, dst)).or_default();
        *e = e.add(&label);
        if e.is_zero() {
            self.entries.remove(&(src, dst));
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &AlgElem)> {
        self.entries.iter().map(|(&(s, d), l)| (s, d, l))
    }

    pub fn entry(&self, src: usize, dst: usize) -> AlgElem {
        self.entries.get(&(src, dst)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &MorElem) -> MorElem {
        assert_eq!(self.gr, other.gr, "adding morphisms of different degree");
        let mut out = self.clone();
        for (s, d, l) in other.entries() {
            out.add_entry(s, d, l.clone());
        }
        out
    }

    /// Degree-and-idempotent validation of `self: X → Y`.
    pub fn validate(&self, x: &TypeD, y: &TypeD) -> Result<(), TypedError> {
        for (s, d, l) in self.entries() {
            let (src, dst) = (&x.gens[s], &y.gens[d]);
            for &t in l.terms() {
                if t.right != src.idem || t.left() != dst.idem {
                    return Err(TypedError::IdemMismatch {
                        src: src.id.clone(),
                        dst: dst.id.clone(),
                        label: l.to_string(),
                    });
                }
                if t.grading() + dst.gr - src.gr != self.gr {
                    return Err(TypedError::MorDegree {
                        src: src.id.clone(),
                        dst: dst.id.clone(),
                        term: t.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `∂(f) = d_Y ∘ f + f ∘ d_X`, one δ-degree below `f`.
    pub fn boundary(&self, x: &TypeD, y: &TypeD) -> MorElem {
        let mut out = MorElem::zero(self.gr + ARROW_DEGREE);
        for (s, d, a) in self.entries() {
            for (d2, b) in y.arrows_from(d) {
                out.add_entry(s, d2, b.mul(a));
            }
        }
        for (s, d, c) in x.arrows() {
            for (&(_, d2), a) in self.entries.range((d, 0)..(d + 1, 0)) {
                out.add_entry(s, d2, a.mul(c));
            }
        }
        out
    }

    pub fn is_chain_map(&self, x: &TypeD, y: &TypeD) -> bool {
        self.boundary(x, y).is_zero()
    }

    /// Composition `self ∘ other` for `other: X → Y`, `self: Y → Z`.
    pub fn compose(&self, other: &MorElem) -> MorElem {
        let mut out = MorElem::zero(self.gr + other.gr);
        for (s, mid, a) in other.entries() {
            for (&(m2, d), b) in self.entries.range((mid, 0)..(mid + 1, 0)) {
                debug_assert_eq!(m2, mid);
                out.add_entry(s, d, b.mul(a));
            }
        }
        out
    }
}

impl fmt::Display for MorElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0 @ {}", self.gr);
        }
        for (i, (s, d, l)) in self.entries().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "#{s} --{l}--> #{d}")?;
        }
        write!(f, " @ {}", self.gr)
    }
}

/// The central elements acting diagonally on any complex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CentralElem {
    H,
    DFilled,
    DHollow,
    S2,
}

impl CentralElem {
    pub fn label_at(self, i: Idem) -> AlgElem {
        match self {
            CentralElem::H => AlgElem::from_paths([BasisPath::d(1, i), BasisPath::s(2, i)]),
            CentralElem::DFilled => match i {
                Idem::Filled => AlgElem::from_path(BasisPath::d(1, Idem::Filled)),
                Idem::Hollow => AlgElem::zero(),
            },
            CentralElem::DHollow => match i {
                Idem::Hollow => AlgElem::from_path(BasisPath::d(1, Idem::Hollow)),
                Idem::Filled => AlgElem::zero(),
            },
            CentralElem::S2 => AlgElem::from_path(BasisPath::s(2, i)),
        }
    }
}

impl fmt::Display for CentralElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CentralElem::H => write!(f, "H"),
            CentralElem::DFilled => write!(f, "D."),
            CentralElem::DHollow => write!(f, "D:"),
            CentralElem::S2 => write!(f, "S^2"),
        }
    }
}

/// `z·id : X → X`, the diagonal morphism with `z` projected to each
/// generator's idempotent. A chain map because `z` is central.
pub fn central_action(z: CentralElem, x: &TypeD) -> MorElem {
    let mut f = MorElem::zero(Bigrading::new(-2, -2));
    for (i, g) in x.gens().iter().enumerate() {
        f.add_entry(i, i, z.label_at(g.idem));
    }
    f
}

/// Mapping cone of a degree-`(−2,−2)` chain map `f: X → X`, with the
/// source copy shifted by `(−1,+1)` and the target copy by `(+1,+1)`.
pub fn cone(f: &MorElem, x: &TypeD) -> Result<TypeD, TypedError> {
    if f.gr != Bigrading::new(-2, -2) {
        return Err(TypedError::ConeDegree(f.gr));
    }
    if !f.is_chain_map(x, x) {
        let b = f.boundary(x, x);
        let (s, d, v) = b.entries().next().expect("nonzero boundary");
        return Err(TypedError::NotChainMap {
            src: x.gens[s].id.clone(),
            dst: x.gens[d].id.clone(),
            value: v.to_string(),
        });
    }
    let n = x.gen_count();
    let src_copy = x.shifted(Bigrading::new(-1, 1), "~0");
    let dst_copy = x.shifted(Bigrading::new(1, 1), "~1");
    let mut out = TypeD::new();
    for g in src_copy.gens() {
        out.add_gen(g.id.clone(), g.idem, g.gr);
    }
    for g in dst_copy.gens() {
        out.add_gen(g.id.clone(), g.idem, g.gr);
    }
    for (s, d, l) in x.arrows() {
        out.add_arrow(s, d, l.clone());
        out.add_arrow(n + s, n + d, l.clone());
    }
    for (s, d, l) in f.entries() {
        out.add_arrow(s, n + d, l.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PathKind;
    use Idem::{Filled, Hollow};

    fn el(s: &str) -> AlgElem {
        s.parse().unwrap()
    }

    pub(crate) fn single_gen(idem: Idem) -> TypeD {
        let mut x = TypeD::new();
        x.add_gen("g", idem, Bigrading::ZERO);
        x
    }

    /// The two-generator complex [● ⇉ ●] with labels D and S².
    pub(crate) fn r1_complex() -> TypeD {
        let mut x = TypeD::new();
        let a = x.add_gen("a", Filled, Bigrading::new(-1, 1));
        let b = x.add_gen("b", Filled, Bigrading::new(1, 1));
        x.add_arrow(a, b, el("D^1.+S^2."));
        x
    }

    #[test]
    fn check_accepts_valid_shapes() {
        single_gen(Filled).check().unwrap();
        r1_complex().check().unwrap();
    }

    #[test]
    fn check_rejects_bad_squares() {
        let mut x = TypeD::new();
        let a = x.add_gen("a", Filled, Bigrading::ZERO);
        let b = x.add_gen("b", Filled, Bigrading::new(2, 0));
        let c = x.add_gen("c", Filled, Bigrading::new(4, 0));
        x.add_arrow(a, b, el("D^1."));
        x.add_arrow(b, c, el("D^1."));
        match x.check() {
            Err(TypedError::SquareNonzero { value, .. }) => assert_eq!(value, "D^2."),
            other => panic!("expected square failure, got {other:?}"),
        }

        // D then S composes to zero, so this one passes.
        let mut y = TypeD::new();
        let a = y.add_gen("a", Filled, Bigrading::ZERO);
        let b = y.add_gen("b", Filled, Bigrading::new(2, 0));
        let c = y.add_gen("c", Hollow, Bigrading::new(3, -1));
        y.add_arrow(a, b, el("D^1."));
        y.add_arrow(b, c, el("S^1."));
        y.check().unwrap();
    }

    #[test]
    fn check_rejects_idem_and_degree_violations() {
        let mut x = TypeD::new();
        let a = x.add_gen("a", Filled, Bigrading::ZERO);
        let b = x.add_gen("b", Hollow, Bigrading::new(2, 2));
        x.add_arrow(a, b, el("D^1."));
        assert!(matches!(x.check(), Err(TypedError::IdemMismatch { .. })));

        let mut y = TypeD::new();
        let a = y.add_gen("a", Filled, Bigrading::ZERO);
        let b = y.add_gen("b", Filled, Bigrading::ZERO);
        y.add_arrow(a, b, el("D^1."));
        assert!(matches!(y.check(), Err(TypedError::Inhomogeneous { .. })));
    }

    #[test]
    fn central_actions() {
        let x = single_gen(Filled);
        let h = central_action(CentralElem::H, &x);
        assert_eq!(h.entry(0, 0), el("S^2.+D^1."));

        let r1 = r1_complex();
        let dh = central_action(CentralElem::DHollow, &r1);
        assert!(dh.is_zero());
        let s2 = central_action(CentralElem::S2, &r1);
        assert_eq!(s2.entry(0, 0), el("S^2."));
        assert_eq!(s2.entry(1, 1), el("S^2."));
        for z in [CentralElem::H, CentralElem::DFilled, CentralElem::DHollow, CentralElem::S2] {
            let f = central_action(z, &r1);
            f.validate(&r1, &r1).unwrap();
            assert!(f.is_chain_map(&r1, &r1), "{z} fails to commute");
        }
        let h = central_action(CentralElem::H, &r1);
        let sum = central_action(CentralElem::DFilled, &r1)
            .add(&central_action(CentralElem::DHollow, &r1))
            .add(&central_action(CentralElem::S2, &r1));
        assert_eq!(h, sum);
    }

    #[test]
    fn cone_of_h_on_a_point_is_the_two_parallel_arrow_complex() {
        let x = single_gen(Filled);
        let c = cone(&central_action(CentralElem::H, &x), &x).unwrap();
        c.check().unwrap();
        assert_eq!(c.gen_count(), 2);
        assert_eq!(c.gens()[0].gr, Bigrading::new(-1, 1));
        assert_eq!(c.gens()[1].gr, Bigrading::new(1, 1));
        assert_eq!(c.arrow(0, 1), el("S^2.+D^1."));
        assert_eq!(c.relative_signature(), r1_complex().relative_signature());
    }

    #[test]
    fn cone_rejects_non_chain_maps() {
        let r1 = r1_complex();
        assert!(matches!(
            cone(&MorElem::zero(Bigrading::new(-1, -1)), &r1),
            Err(TypedError::ConeDegree(_))
        ));
        // a ↦ a ⊗ D is homogeneous but has nonzero boundary (a, D², b).
        let mut f = MorElem::zero(Bigrading::new(-2, -2));
        f.add_entry(0, 0, el("D^1."));
        f.validate(&r1, &r1).unwrap();
        assert_eq!(f.boundary(&r1, &r1).entry(0, 1), el("D^2."));
        assert!(matches!(cone(&f, &r1), Err(TypedError::NotChainMap { .. })));
    }

    #[test]
    fn dual_is_an_involution_and_valid() {
        let r1 = r1_complex();
        let d = r1.dual();
        d.check().unwrap();
        assert_eq!(d.dual(), r1);
        assert_eq!(d.arrow(1, 0), el("D^1.+S^2."));

        let mut x = TypeD::new();
        let a = x.add_gen("a", Filled, Bigrading::new(0, 2));
        let b = x.add_gen("b", Hollow, Bigrading::new(1, 1));
        x.add_arrow(a, b, el("S^1."));
        x.check().unwrap();
        let d = x.dual();
        d.check().unwrap();
        assert_eq!(d.arrow(1, 0), el("S^1:"));
    }

    #[test]
    fn boundary_and_composition() {
        // On the cone of H over a point, H·id is null-homotopic via the
        // reversed identity arrow.
        let c = cone(&central_action(CentralElem::H, &single_gen(Filled)), &single_gen(Filled)).unwrap();
        let h = central_action(CentralElem::H, &c);
        let mut wit = MorElem::zero(Bigrading::new(-2, 0));
        wit.add_entry(1, 0, el("i."));
        wit.validate(&c, &c).unwrap();
        assert_eq!(wit.boundary(&c, &c), h);
    }

    #[test]
    fn components_and_restriction() {
        let r1 = r1_complex();
        let pt = single_gen(Hollow);
        let sum = TypeD::direct_sum(&[&r1, &pt]);
        sum.check().unwrap();
        let comps = sum.component_indices();
        assert_eq!(comps, vec![vec![0, 1], vec![2]]);
        let first = sum.restrict(&comps[0]);
        assert_eq!(first, r1);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let c = cone(&central_action(CentralElem::H, &r1_complex()), &r1_complex()).unwrap();
        let js = serde_json::to_string_pretty(&c).unwrap();
        let back: TypeD = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), js);
        assert!(js.contains("\"idem\": \".\""));
    }

    #[test]
    fn display_kinds() {
        assert_eq!(PathKind::S(2).len(), 2);
        let r1 = r1_complex();
        let shown = r1.to_string();
        assert!(shown.contains("a --S^2.+D^1.--> b"), "{shown}");
    }
}
