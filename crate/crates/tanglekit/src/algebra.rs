//! Exact arithmetic in the path algebra of the quiver with two vertices
//! `●` and `∘`, an arrow `S` between them (in both directions) and a loop
//! `D` at each vertex, over F₂, subject to the relations that kill every
//! product mixing an `S`-path with a `D`-path.
//!
//! Basis paths are `ι_●`, `ι_∘`, `S^n`, `D^n`, each tagged with its right
//! idempotent; the left idempotent is determined (S swaps the vertex once
//! per letter, D never does). The product `mul(a, b)` is "a after b": it
//! requires `right_idem(a) = left_idem(b)`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Quiver vertex, doubling as an idempotent of the algebra.
/// `Filled` is written `●` / `"."`, `Hollow` is `∘` / `":"`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Idem {
    #[serde(rename = ".")]
    Filled,
    #[serde(rename = ":")]
    Hollow,
}

impl Idem {
    pub fn other(self) -> Idem {
        match self {
            Idem::Filled => Idem::Hollow,
            Idem::Hollow => Idem::Filled,
        }
    }

    pub fn suffix(self) -> char {
        match self {
            Idem::Filled => '.',
            Idem::Hollow => ':',
        }
    }

    pub fn from_suffix(c: char) -> Option<Idem> {
        match c {
            '.' => Some(Idem::Filled),
            ':' => Some(Idem::Hollow),
            _ => None,
        }
    }
}

impl fmt::Display for Idem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.suffix())
    }
}

/// Shape of a basis path: the idempotents, a pure `S`-power or a pure
/// `D`-power. Mixed words are zero in the algebra and never represented.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PathKind {
    Unit,
    S(u32),
    D(u32),
}

impl PathKind {
    pub fn len(self) -> u32 {
        match self {
            PathKind::Unit => 0,
            PathKind::S(n) | PathKind::D(n) => n,
        }
    }

    fn rank(self) -> u8 {
        match self {
            PathKind::Unit => 0,
            PathKind::S(_) => 1,
            PathKind::D(_) => 2,
        }
    }
}

/// A basis path of the algebra: kind plus right idempotent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BasisPath {
    pub kind: PathKind,
    pub right: Idem,
}

impl BasisPath {
    pub fn unit(i: Idem) -> Self {
        BasisPath { kind: PathKind::Unit, right: i }
    }

    /// `S^n` ending at (composable on the right with) `right`.
    pub fn s(n: u32, right: Idem) -> Self {
        assert!(n >= 1);
        BasisPath { kind: PathKind::S(n), right }
    }

    /// `D^n` at vertex `right`.
    pub fn d(n: u32, right: Idem) -> Self {
        assert!(n >= 1);
        BasisPath { kind: PathKind::D(n), right }
    }

    pub fn left(self) -> Idem {
        match self.kind {
            PathKind::Unit | PathKind::D(_) => self.right,
            PathKind::S(n) => {
                if n % 2 == 0 {
                    self.right
                } else {
                    self.right.other()
                }
            }
        }
    }

    pub fn len(self) -> u32 {
        self.kind.len()
    }

    pub fn is_unit(self) -> bool {
        matches!(self.kind, PathKind::Unit)
    }

    /// `(q, 2δ)` of the path. Each `S` letter contributes `(−1, −1)`,
    /// each `D` letter `(−2, −2)`.
    pub fn grading(self) -> Bigrading {
        match self.kind {
            PathKind::Unit => Bigrading::ZERO,
            PathKind::S(n) => Bigrading { q: -(n as i32), delta2: -(n as i32) },
            PathKind::D(n) => Bigrading { q: -2 * (n as i32), delta2: -2 * (n as i32) },
        }
    }

    /// Swap left and right idempotents; an anti-automorphism on products.
    pub fn reverse(self) -> BasisPath {
        BasisPath { kind: self.kind, right: self.left() }
    }

    /// Path composition `self · other` (`self` after `other`).
    /// `None` encodes zero: idempotent mismatch or a mixed `S`/`D` word.
    pub fn mul(self, other: BasisPath) -> Option<BasisPath> {
        if self.right != other.left() {
            return None;
        }
        match (self.kind, other.kind) {
            (PathKind::Unit, _) => Some(other),
            (_, PathKind::Unit) => Some(self),
            (PathKind::S(a), PathKind::S(b)) => Some(BasisPath::s(a + b, other.right)),
            (PathKind::D(a), PathKind::D(b)) => Some(BasisPath::d(a + b, other.right)),
            _ => None,
        }
    }

    fn order_key(self) -> (u8, u32, Idem) {
        (self.kind.rank(), self.len(), self.right)
    }
}

// Canonical term order: kind, then length, then right idempotent.
impl PartialOrd for BasisPath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BasisPath {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for BasisPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PathKind::Unit => write!(f, "i{}", self.right.suffix()),
            PathKind::S(n) => write!(f, "S^{}{}", n, self.right.suffix()),
            PathKind::D(n) => write!(f, "D^{}{}", n, self.right.suffix()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as an algebra element")]
pub struct ParseElemError(pub String);

impl FromStr for BasisPath {
    type Err = ParseElemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseElemError(s.to_string());
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(err)?;
        let rest: String = chars.collect();
        let (body, suffix) = rest.split_at(rest.len().saturating_sub(1));
        let right = suffix
            .chars()
            .next()
            .and_then(Idem::from_suffix)
            .ok_or_else(err)?;
        match head {
            'i' if body.is_empty() => Ok(BasisPath::unit(right)),
            'S' | 'D' => {
                let n: u32 = match body.strip_prefix('^') {
                    Some(digits) => digits.parse().map_err(|_| err())?,
                    None if body.is_empty() => 1,
                    None => return Err(err()),
                };
                if n == 0 {
                    return Err(err());
                }
                Ok(if head == 'S' { BasisPath::s(n, right) } else { BasisPath::d(n, right) })
            }
            _ => Err(err()),
        }
    }
}

/// `(q, 2δ)` bigrading. δ is half-integral, so `2δ` is stored; the
/// homological grading is `h = ½q − δ = (q − 2δ)/2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Bigrading {
    pub q: i32,
    pub delta2: i32,
}

impl Bigrading {
    pub const ZERO: Bigrading = Bigrading { q: 0, delta2: 0 };

    pub fn new(q: i32, delta2: i32) -> Self {
        Bigrading { q, delta2 }
    }

    /// `h = (q − 2δ)/2`; callers must know parity is even.
    pub fn h(self) -> i32 {
        debug_assert!((self.q - self.delta2) % 2 == 0, "odd h for {self:?}");
        (self.q - self.delta2) / 2
    }

    pub fn h_twice(self) -> i32 {
        self.q - self.delta2
    }
}

impl std::ops::Add for Bigrading {
    type Output = Bigrading;
    fn add(self, rhs: Bigrading) -> Bigrading {
        Bigrading { q: self.q + rhs.q, delta2: self.delta2 + rhs.delta2 }
    }
}

impl std::ops::Sub for Bigrading {
    type Output = Bigrading;
    fn sub(self, rhs: Bigrading) -> Bigrading {
        Bigrading { q: self.q - rhs.q, delta2: self.delta2 - rhs.delta2 }
    }
}

impl std::ops::Neg for Bigrading {
    type Output = Bigrading;
    fn neg(self) -> Bigrading {
        Bigrading { q: -self.q, delta2: -self.delta2 }
    }
}

impl std::ops::Mul<i32> for Bigrading {
    type Output = Bigrading;
    fn mul(self, k: i32) -> Bigrading {
        Bigrading { q: self.q * k, delta2: self.delta2 * k }
    }
}

impl fmt::Display for Bigrading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, 2d={})", self.q, self.delta2)
    }
}

/// F₂-linear combination of basis paths. Terms are kept sorted in the
/// canonical order and duplicate-free; presence means coefficient 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct AlgElem {
    terms: Vec<BasisPath>,
}

impl AlgElem {
    pub fn zero() -> Self {
        AlgElem { terms: Vec::new() }
    }

    pub fn from_path(p: BasisPath) -> Self {
        AlgElem { terms: vec![p] }
    }

    pub fn from_paths(paths: impl IntoIterator<Item = BasisPath>) -> Self {
        let mut e = AlgElem::zero();
        for p in paths {
            e.toggle(p);
        }
        e
    }

    /// The unit `ι_● + ι_∘`.
    pub fn one() -> Self {
        AlgElem::from_paths([BasisPath::unit(Idem::Filled), BasisPath::unit(Idem::Hollow)])
    }

    /// Central element `D_● + D_∘ + S²_● + S²_∘`. `H·x = x·H` for all `x`.
    pub fn central_h() -> Self {
        AlgElem::from_paths([
            BasisPath::d(1, Idem::Filled),
            BasisPath::d(1, Idem::Hollow),
            BasisPath::s(2, Idem::Filled),
            BasisPath::s(2, Idem::Hollow),
        ])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[BasisPath] {
        &self.terms
    }

    pub fn contains(&self, p: &BasisPath) -> bool {
        self.terms.binary_search(p).is_ok()
    }

    /// Flip the coefficient of `p` (characteristic 2).
    pub fn toggle(&mut self, p: BasisPath) {
        match self.terms.binary_search(&p) {
            Ok(i) => {
                self.terms.remove(i);
            }
            Err(i) => self.terms.insert(i, p),
        }
    }

    pub fn add(&self, other: &AlgElem) -> AlgElem {
        let mut out = self.clone();
        for &p in &other.terms {
            out.toggle(p);
        }
        out
    }

    /// `self · other` with `self` acting after `other`.
    pub fn mul(&self, other: &AlgElem) -> AlgElem {
        let mut out = AlgElem::zero();
        for &p in &self.terms {
            for &q in &other.terms {
                if let Some(r) = p.mul(q) {
                    out.toggle(r);
                }
            }
        }
        out
    }

    pub fn reverse(&self) -> AlgElem {
        AlgElem::from_paths(self.terms.iter().map(|p| p.reverse()))
    }

    /// Keep only terms with the given left idempotent.
    pub fn project_left(&self, i: Idem) -> AlgElem {
        AlgElem::from_paths(self.terms.iter().copied().filter(|p| p.left() == i))
    }

    /// Keep only terms with the given right idempotent.
    pub fn project_right(&self, i: Idem) -> AlgElem {
        AlgElem::from_paths(self.terms.iter().copied().filter(|p| p.right == i))
    }

    /// Grading if all terms agree on it, else `None` (0 is homogeneous of
    /// every degree, reported as `None` too).
    pub fn homogeneous_grading(&self) -> Option<Bigrading> {
        let first = self.terms.first()?.grading();
        self.terms.iter().all(|p| p.grading() == first).then_some(first)
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, p) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for AlgElem {
    type Err = ParseElemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(AlgElem::zero());
        }
        let mut e = AlgElem::zero();
        for part in s.split('+') {
            e.toggle(part.trim().parse()?);
        }
        Ok(e)
    }
}

impl Serialize for AlgElem {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AlgElem {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All basis paths of length ≤ `max_len`, in canonical order.
pub fn basis_paths_up_to(max_len: u32) -> Vec<BasisPath> {
    let mut out = Vec::new();
    for i in [Idem::Filled, Idem::Hollow] {
        out.push(BasisPath::unit(i));
    }
    for n in 1..=max_len {
        for i in [Idem::Filled, Idem::Hollow] {
            out.push(BasisPath::s(n, i));
        }
    }
    for n in 1..=max_len {
        for i in [Idem::Filled, Idem::Hollow] {
            out.push(BasisPath::d(n, i));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Idem::{Filled, Hollow};

    fn s(n: u32, r: Idem) -> AlgElem {
        AlgElem::from_path(BasisPath::s(n, r))
    }

    fn d(n: u32, r: Idem) -> AlgElem {
        AlgElem::from_path(BasisPath::d(n, r))
    }

    fn unit(r: Idem) -> AlgElem {
        AlgElem::from_path(BasisPath::unit(r))
    }

    #[test]
    fn generator_products() {
        // ∘S_● · ●S_∘ = ∘S²_∘ : odd S-powers swap the vertex.
        let a = BasisPath::s(1, Filled); // left ∘, right ●
        let b = BasisPath::s(1, Hollow); // left ●, right ∘
        assert_eq!(a.left(), Hollow);
        assert_eq!(b.left(), Filled);
        assert_eq!(a.mul(b), Some(BasisPath::s(2, Hollow)));

        // D_● · ●S_∘ = 0 even though the idempotents match.
        let da = BasisPath::d(1, Filled);
        assert_eq!(da.right, b.left());
        assert_eq!(da.mul(b), None);
    }

    #[test]
    fn unit_acts_as_identity() {
        let one = AlgElem::one();
        for p in basis_paths_up_to(4) {
            let e = AlgElem::from_path(p);
            assert_eq!(one.mul(&e), e);
            assert_eq!(e.mul(&one), e);
        }
    }

    #[test]
    fn h_is_central() {
        let h = AlgElem::central_h();
        for p in basis_paths_up_to(6) {
            let e = AlgElem::from_path(p);
            assert_eq!(h.mul(&e), e.mul(&h), "H fails to commute with {p}");
        }
        // H · ●S_∘ = ●S³_∘ from the S²-component only.
        assert_eq!(h.mul(&s(1, Hollow)), s(3, Hollow));
        // H² = D² + S⁴ in both idempotent flavours.
        let h2 = h.mul(&h);
        let expected = d(2, Filled)
            .add(&d(2, Hollow))
            .add(&s(4, Filled))
            .add(&s(4, Hollow));
        assert_eq!(h2, expected);
    }

    #[test]
    fn associativity_exhaustive() {
        let paths = basis_paths_up_to(6);
        for &a in &paths {
            for &b in &paths {
                let ab = a.mul(b);
                for &c in &paths {
                    let left = ab.and_then(|x| x.mul(c));
                    let right = b.mul(c).and_then(|x| a.mul(x));
                    assert_eq!(left, right, "({a})({b})({c})");
                }
            }
        }
    }

    #[test]
    fn grading_additive_on_products() {
        let paths = basis_paths_up_to(6);
        for &a in &paths {
            for &b in &paths {
                if let Some(c) = a.mul(b) {
                    assert_eq!(a.grading() + b.grading(), c.grading());
                }
            }
        }
        assert_eq!(BasisPath::s(1, Filled).grading(), Bigrading::new(-1, -1));
        assert_eq!(BasisPath::d(3, Filled).grading(), Bigrading::new(-6, -6));
        assert_eq!(BasisPath::unit(Hollow).grading(), Bigrading::ZERO);
    }

    #[test]
    fn reverse_is_an_anti_automorphism() {
        let paths = basis_paths_up_to(6);
        for &a in &paths {
            assert_eq!(a.reverse().reverse(), a);
            let (l, r) = (a.left(), a.right);
            assert_eq!(a.reverse().left(), r);
            assert_eq!(a.reverse().right, l);
        }
        for &a in &paths {
            for &b in &paths {
                let lhs = AlgElem::from_path(a).mul(&AlgElem::from_path(b)).reverse();
                let rhs = AlgElem::from_path(b)
                    .reverse()
                    .mul(&AlgElem::from_path(a).reverse());
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(BasisPath::s(1, Hollow).reverse(), BasisPath::s(1, Filled));
        assert_eq!(BasisPath::d(1, Filled).reverse(), BasisPath::d(1, Filled));
    }

    #[test]
    fn characteristic_two() {
        let e = s(2, Filled).add(&d(1, Hollow));
        assert!(e.add(&e).is_zero());
    }

    #[test]
    fn projections() {
        let h = AlgElem::central_h();
        assert_eq!(h.project_right(Filled), d(1, Filled).add(&s(2, Filled)));
        assert_eq!(
            h.project_right(Filled).project_left(Filled),
            d(1, Filled).add(&s(2, Filled))
        );
        assert_eq!(unit(Filled).add(&unit(Hollow)), AlgElem::one());
    }

    #[test]
    fn text_round_trip() {
        for p in basis_paths_up_to(5) {
            let shown = p.to_string();
            let back: BasisPath = shown.parse().unwrap();
            assert_eq!(back, p);
        }
        let e = s(3, Hollow).add(&d(2, Filled)).add(&unit(Filled));
        let shown = e.to_string();
        assert_eq!(shown.parse::<AlgElem>().unwrap(), e);
        assert_eq!("0".parse::<AlgElem>().unwrap(), AlgElem::zero());
        assert_eq!("S.".parse::<BasisPath>().unwrap(), BasisPath::s(1, Filled));
        assert!("S^0.".parse::<BasisPath>().is_err());
        assert!("Q^2.".parse::<BasisPath>().is_err());
    }

    #[test]
    fn canonical_term_order() {
        let e = d(1, Filled).add(&s(2, Hollow)).add(&unit(Filled)).add(&s(1, Filled));
        assert_eq!(e.to_string(), "i.+S^1.+S^2:+D^1.");
    }
}
