//! Curve-type invariants: the standard rational and special complexes,
//! half-twist bimodules and their action on slopes, classification of a
//! complex by twist descent, and basing detection through the central
//! elements.

use crate::algebra::{AlgElem, BasisPath, Bigrading, Idem};
use crate::bimodule::{box_tensor, ADBimodule, Action, HPat};
use crate::hom::{is_nullhomotopic, mor_basis};
use crate::simplify::{base_change, decompose, reduce};
use crate::typed::{central_action, CentralElem, TypeD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// Slopes and twist letters

/// A slope `p/q` in lowest terms with `q ≥ 0`; `1/0` is the vertical
/// slope ∞.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Slope {
    pub p: i64,
    pub q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Slope {
        if q == 0 {
            assert!(p != 0, "0/0 is not a slope");
            return Slope { p: 1, q: 0 };
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        if q < 0 {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        }
    }

    pub fn integer(k: i64) -> Slope {
        Slope { p: k, q: 1 }
    }

    pub const INFINITY: Slope = Slope { p: 1, q: 0 };

    pub fn is_infinite(self) -> bool {
        self.q == 0
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 0 {
            write!(f, "inf")
        } else if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl std::str::FromStr for Slope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" || s == "oo" {
            return Ok(Slope::INFINITY);
        }
        let (p, q) = match s.split_once('/') {
            Some((a, b)) => (
                a.trim().parse::<i64>().map_err(|e| e.to_string())?,
                b.trim().parse::<i64>().map_err(|e| e.to_string())?,
            ),
            None => (s.parse::<i64>().map_err(|e| e.to_string())?, 1),
        };
        if p == 0 && q == 0 {
            return Err("0/0 is not a slope".into());
        }
        Ok(Slope::new(p, q))
    }
}

/// Generators of the relevant mapping classes: the two half twists and
/// their inverses. `T1` adds one to the slope; `T2` sends `s` to
/// `s/(s+1)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum TwistLetter {
    T1,
    T1Inv,
    T2,
    T2Inv,
}

impl TwistLetter {
    pub const ALL: [TwistLetter; 4] =
        [TwistLetter::T1, TwistLetter::T1Inv, TwistLetter::T2, TwistLetter::T2Inv];

    pub fn inverse(self) -> TwistLetter {
        match self {
            TwistLetter::T1 => TwistLetter::T1Inv,
            TwistLetter::T1Inv => TwistLetter::T1,
            TwistLetter::T2 => TwistLetter::T2Inv,
            TwistLetter::T2Inv => TwistLetter::T2,
        }
    }

    pub fn on_slope(self, s: Slope) -> Slope {
        match self {
            TwistLetter::T1 => Slope::new(s.p + s.q, s.q),
            TwistLetter::T1Inv => Slope::new(s.p - s.q, s.q),
            TwistLetter::T2 => Slope::new(s.p, s.p + s.q),
            TwistLetter::T2Inv => Slope::new(s.p, s.q - s.p),
        }
    }

    pub fn bimodule(self) -> &'static ADBimodule {
        static TABLES: OnceLock<[ADBimodule; 4]> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            let t1 = east_half_twist();
            let t1i = t1.reversed("t1'");
            // The idempotent swap is an orientation-reversing symmetry,
            // so it carries the east table to the inverse south twist.
            let t2i = t1.swapped("t2'");
            let t2 = t2i.reversed("t2");
            [t1, t1i, t2, t2i]
        });
        match self {
            TwistLetter::T1 => &tables[0],
            TwistLetter::T1Inv => &tables[1],
            TwistLetter::T2 => &tables[2],
            TwistLetter::T2Inv => &tables[3],
        }
    }
}

impl fmt::Display for TwistLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistLetter::T1 => write!(f, "t1"),
            TwistLetter::T1Inv => write!(f, "t1'"),
            TwistLetter::T2 => write!(f, "t2"),
            TwistLetter::T2Inv => write!(f, "t2'"),
        }
    }
}

/// The positive half twist on the east pair of ends, as a type AD
/// bimodule. Generators `m0 = (●,●)`, `m1 = (●,∘)`, `m2 = (∘,∘)`.
fn east_half_twist() -> ADBimodule {
    use HPat::{DH, H, S2H, SH};
    let a = |src, dst, inputs: &[HPat], out| Action { src, dst, inputs: inputs.to_vec(), out };
    ADBimodule::new(
        "t1",
        vec![
            ("m0", Idem::Filled, Idem::Filled),
            ("m1", Idem::Filled, Idem::Hollow),
            ("m2", Idem::Hollow, Idem::Hollow),
        ],
        vec![
            a(0, 1, &[], SH),
            a(0, 0, &[DH], DH),
            a(0, 0, &[H], H),
            a(1, 0, &[SH, SH], SH),
            a(1, 2, &[SH], DH),
            a(1, 1, &[H], H),
            a(2, 0, &[SH, DH], SH),
            a(2, 1, &[SH], H),
            a(2, 2, &[H], H),
            a(2, 2, &[DH], S2H),
        ],
    )
    .expect("half-twist table is valid")
}

/// One twist applied to a complex: box tensor with the letter's bimodule
/// followed by reduction.
pub fn apply_twist(x: &TypeD, letter: TwistLetter) -> TypeD {
    reduce(&box_tensor(x, letter.bimodule())).complex
}

pub fn apply_word(x: &TypeD, word: &[TwistLetter]) -> TypeD {
    word.iter().fold(x.clone(), |acc, &l| apply_twist(&acc, l))
}

/// A word sending slope 0 to `s`, by continued fractions. Letters are
/// listed in application order.
pub fn word_for_slope(s: Slope) -> Vec<TwistLetter> {
    fn go(p: i64, q: i64, out: &mut Vec<TwistLetter>) {
        if p == 0 {
            return;
        }
        if q == 0 {
            go(1, 1, out);
            out.push(TwistLetter::T2Inv);
        } else if p >= q {
            go(p - q, q, out);
            out.push(TwistLetter::T1);
        } else if p <= -q {
            go(p + q, q, out);
            out.push(TwistLetter::T1Inv);
        } else if p > 0 {
            go(p, q - p, out);
            out.push(TwistLetter::T2);
        } else {
            go(p, q + p, out);
            out.push(TwistLetter::T2Inv);
        }
    }
    let mut out = Vec::new();
    go(s.p, s.q, &mut out);
    out
}

pub fn slope_of_word(word: &[TwistLetter]) -> Slope {
    word.iter().fold(Slope::new(0, 1), |s, &l| l.on_slope(s))
}

// ---------------------------------------------------------------------------
// Standard complexes

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SlopeEnd {
    Zero,
    Infinity,
}

/// Global idempotent swap of a complex; sends the slope-0 forms to the
/// slope-∞ forms.
pub fn swap_idems(x: &TypeD) -> TypeD {
    let mut out = TypeD::new();
    for g in x.gens() {
        out.add_gen(g.id.clone(), g.idem.other(), g.gr);
    }
    for (s, d, l) in x.arrows() {
        let flipped = AlgElem::from_paths(
            l.terms().iter().map(|t| BasisPath { kind: t.kind, right: t.right.other() }),
        );
        out.add_arrow(s, d, flipped);
    }
    out
}

/// The rational curve complex of length `n` at slope 0 (all ● with two
/// alternating D/S² paths from source to sink) or slope ∞ (the same with
/// idempotents swapped).
pub fn rational_complex(n: usize, end: SlopeEnd) -> TypeD {
    assert!(n >= 1);
    let mut x = TypeD::new();
    let step = Bigrading::new(2, 0);
    let src = x.add_gen("p0", Idem::Filled, Bigrading::ZERO);
    let snk = x.add_gen("p1", Idem::Filled, Bigrading::new(2 * n as i32, 0));
    let d = AlgElem::from_path(BasisPath::d(1, Idem::Filled));
    let s2 = AlgElem::from_path(BasisPath::s(2, Idem::Filled));
    for (row, first) in [("t", true), ("b", false)] {
        let mut prev = src;
        for k in 1..n {
            let g = x.add_gen(format!("{row}{k}"), Idem::Filled, Bigrading::ZERO + step * k as i32);
            let odd = k % 2 == 1;
            x.add_arrow(prev, g, if odd == first { d.clone() } else { s2.clone() });
            prev = g;
        }
        let odd = n % 2 == 1;
        x.add_arrow(prev, snk, if odd == first { d.clone() } else { s2.clone() });
    }
    match end {
        SlopeEnd::Zero => x,
        SlopeEnd::Infinity => swap_idems(&x),
    }
}

/// The special curve complex of length parameter `n` (4n+4 generators)
/// at slope 0: two parallel rows `∘ →S→ ● … ● →S→ ∘` whose interior
/// alternates D, S², …, D, joined by vertical D arrows at both ends.
pub fn special_complex(n: usize, end: SlopeEnd) -> TypeD {
    assert!(n >= 1);
    let mut x = TypeD::new();
    let s_to = |i: Idem| AlgElem::from_path(BasisPath::s(1, i));
    let d_at = |i: Idem| AlgElem::from_path(BasisPath::d(1, i));
    let s2_at = |i: Idem| AlgElem::from_path(BasisPath::s(2, i));
    let mut ends = Vec::new();
    for row in 0..2 {
        let off = Bigrading::new(2, 0) * row as i32;
        let l = x.add_gen(format!("L{row}"), Idem::Hollow, off);
        let mut prev = x.add_gen(format!("e{row}_1"), Idem::Filled, off + Bigrading::new(1, -1));
        x.add_arrow(l, prev, s_to(Idem::Hollow));
        for k in 2..=2 * n {
            let g = x.add_gen(
                format!("e{row}_{k}"),
                Idem::Filled,
                off + Bigrading::new(1 + 2 * (k as i32 - 1), -1),
            );
            let odd = (k - 1) % 2 == 1;
            x.add_arrow(prev, g, if odd { d_at(Idem::Filled) } else { s2_at(Idem::Filled) });
            prev = g;
        }
        let r = x.add_gen(
            format!("R{row}"),
            Idem::Hollow,
            off + Bigrading::new(4 * n as i32, -2),
        );
        x.add_arrow(prev, r, s_to(Idem::Filled));
        ends.push((l, r));
    }
    x.add_arrow(ends[0].0, ends[1].0, d_at(Idem::Hollow));
    x.add_arrow(ends[0].1, ends[1].1, d_at(Idem::Hollow));
    match end {
        SlopeEnd::Zero => x,
        SlopeEnd::Infinity => swap_idems(&x),
    }
}

// ---------------------------------------------------------------------------
// Isomorphism testing

fn rel_gradings(x: &TypeD) -> Vec<Bigrading> {
    let base = x
        .gens()
        .iter()
        .map(|g| (g.gr.delta2, g.gr.q))
        .min()
        .map(|(d, q)| Bigrading::new(q, d))
        .unwrap_or(Bigrading::ZERO);
    x.gens().iter().map(|g| g.gr - base).collect()
}

/// Strict isomorphism: a generator bijection preserving idempotents,
/// gradings up to one overall shift, and every arrow label on the nose.
pub fn are_isomorphic(a: &TypeD, b: &TypeD) -> bool {
    if a.gen_count() != b.gen_count() {
        return false;
    }
    if a.relative_signature() != b.relative_signature() {
        return false;
    }
    let (ga, gb) = (rel_gradings(a), rel_gradings(b));
    let degree = |x: &TypeD, i: usize| {
        let out = x.arrows_from(i).count();
        let into = x.arrows().filter(|&(_, d, _)| d == i).count();
        (out, into)
    };
    let da: Vec<_> = (0..a.gen_count()).map(|i| degree(a, i)).collect();
    let db: Vec<_> = (0..b.gen_count()).map(|i| degree(b, i)).collect();

    let mut cand: Vec<Vec<usize>> = Vec::new();
    for i in 0..a.gen_count() {
        let list: Vec<usize> = (0..b.gen_count())
            .filter(|&j| {
                a.gens()[i].idem == b.gens()[j].idem && ga[i] == gb[j] && da[i] == db[j]
            })
            .collect();
        if list.is_empty() {
            return false;
        }
        cand.push(list);
    }
    let mut order: Vec<usize> = (0..a.gen_count()).collect();
    order.sort_by_key(|&i| cand[i].len());

    fn go(
        pos: usize,
        order: &[usize],
        cand: &[Vec<usize>],
        a: &TypeD,
        b: &TypeD,
        image: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let i = order[pos];
        'next: for &j in &cand[i] {
            if used[j] {
                continue;
            }
            for k in order[..pos].iter().copied() {
                let fk = image[k].unwrap();
                if a.arrow(i, k) != b.arrow(j, fk) || a.arrow(k, i) != b.arrow(fk, j) {
                    continue 'next;
                }
            }
            if a.arrow(i, i) != b.arrow(j, j) {
                continue;
            }
            image[i] = Some(j);
            used[j] = true;
            if go(pos + 1, order, cand, a, b, image, used) {
                return true;
            }
            image[i] = None;
            used[j] = false;
        }
        false
    }

    let mut image = vec![None; a.gen_count()];
    let mut used = vec![false; b.gen_count()];
    go(0, &order, &cand, a, b, &mut image, &mut used)
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CurveKind {
    Rational,
    Special,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ComponentClass {
    Curve {
        kind: CurveKind,
        n: usize,
        slope: Slope,
        /// Letters that carried the component down to a slope-0/∞ form.
        descent: Vec<TwistLetter>,
    },
    GeographyViolation {
        descent: Vec<TwistLetter>,
        stuck_gens: usize,
        detail: String,
    },
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentClass::Curve { kind, n, slope, .. } => match kind {
                CurveKind::Rational => write!(f, "r{n}({slope})"),
                CurveKind::Special => write!(f, "s{}({slope})", 2 * n),
            },
            ComponentClass::GeographyViolation { stuck_gens, detail, .. } => {
                write!(f, "geography violation: {detail} ({stuck_gens} generators)")
            }
        }
    }
}

/// Matches a reduced, straightened component against the standard forms
/// of its size; returns kind, length and the terminal slope.
fn match_standard(c: &TypeD) -> Option<(CurveKind, usize, Slope)> {
    let total = c.gen_count();
    let hollow = c.gens().iter().filter(|g| g.idem == Idem::Hollow).count();
    let filled = total - hollow;
    let mut candidates: Vec<(CurveKind, usize, SlopeEnd)> = Vec::new();
    if total >= 2 && total % 2 == 0 {
        if hollow == 0 {
            candidates.push((CurveKind::Rational, total / 2, SlopeEnd::Zero));
        }
        if filled == 0 {
            candidates.push((CurveKind::Rational, total / 2, SlopeEnd::Infinity));
        }
    }
    if total >= 8 && (total - 4) % 4 == 0 {
        let n = (total - 4) / 4;
        if hollow == 4 && filled == 4 * n {
            candidates.push((CurveKind::Special, n, SlopeEnd::Zero));
        }
        if filled == 4 && hollow == 4 * n {
            candidates.push((CurveKind::Special, n, SlopeEnd::Infinity));
        }
    }
    for (kind, n, end) in candidates {
        let standard = match kind {
            CurveKind::Rational => rational_complex(n, end),
            CurveKind::Special => special_complex(n, end),
        };
        if are_isomorphic(c, &standard) {
            let slope = match end {
                SlopeEnd::Zero => Slope::new(0, 1),
                SlopeEnd::Infinity => Slope::INFINITY,
            };
            return Some((kind, n, slope));
        }
    }
    None
}

const DESCENT_CAP: usize = 48;

fn classify_component(c: &TypeD) -> ComponentClass {
    let mut cur = reduce(c).complex;
    let mut descent: Vec<TwistLetter> = Vec::new();
    loop {
        let straightened = crate::simplify::straighten(&cur);
        if let Some((kind, n, terminal)) = match_standard(&straightened) {
            let slope = descent
                .iter()
                .rev()
                .fold(terminal, |s, &l| l.inverse().on_slope(s));
            return ComponentClass::Curve { kind, n, slope, descent };
        }
        if descent.len() >= DESCENT_CAP {
            return ComponentClass::GeographyViolation {
                stuck_gens: cur.gen_count(),
                descent,
                detail: "descent exceeded the step limit".into(),
            };
        }
        // Take the letter with the smallest resulting count. Equal
        // counts are legitimate moves: the twisted special forms keep
        // their size while sliding along the slope orbit.
        let mut best: Option<(usize, TwistLetter, TypeD)> = None;
        for letter in TwistLetter::ALL {
            let next = apply_twist(&cur, letter);
            let count = next.gen_count();
            if best.as_ref().map_or(true, |(c, _, _)| count < *c) {
                best = Some((count, letter, next));
            }
        }
        let (count, letter, next) = best.unwrap();
        if count > cur.gen_count() {
            return ComponentClass::GeographyViolation {
                stuck_gens: cur.gen_count(),
                descent,
                detail: "every twist enlarges the component and no standard form matches".into(),
            };
        }
        descent.push(letter);
        cur = next;
    }
}

/// Classifies every indecomposable direct summand. Connected components
/// are not enough: a base change can entangle two summands into one
/// component, so the splitting goes through `decompose`.
pub fn classify(x: &TypeD) -> Vec<ComponentClass> {
    decompose(x).iter().map(classify_component).collect()
}

// ---------------------------------------------------------------------------
// Basing through the central elements

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Basing {
    Horizontal,
    Diagonal,
    Vertical,
}

impl fmt::Display for Basing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basing::Horizontal => write!(f, "horizontal"),
            Basing::Diagonal => write!(f, "diagonal"),
            Basing::Vertical => write!(f, "vertical"),
        }
    }
}

/// The basing determined by slope parity: `p/q` is horizontal for p
/// even, vertical for q even, diagonal when both are odd.
pub fn basing_from_slope(s: Slope) -> Basing {
    match (s.p.rem_euclid(2), s.q.rem_euclid(2)) {
        (0, 1) => Basing::Horizontal,
        (1, 1) => Basing::Diagonal,
        (1, 0) => Basing::Vertical,
        _ => unreachable!("slope not in lowest terms"),
    }
}

/// Which of `D_•·id`, `D_∘·id`, `S²·id` are null-homotopic on `x`.
pub fn central_vanishing(x: &TypeD) -> [bool; 3] {
    [CentralElem::DFilled, CentralElem::DHollow, CentralElem::S2].map(|z| {
        is_nullhomotopic(&central_action(z, x), x, x).expect("central actions are chain maps")
    })
}

/// Null-homotopy record of the central actions and their pairwise sums.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CentralRecord {
    pub h: bool,
    pub d_filled: bool,
    pub d_hollow: bool,
    pub s2: bool,
    /// `D_•·id ≃ S²·id`
    pub d_filled_eq_s2: bool,
    /// `D_∘·id ≃ S²·id`
    pub d_hollow_eq_s2: bool,
    /// `D_•·id ≃ D_∘·id`
    pub d_filled_eq_d_hollow: bool,
}

impl CentralRecord {
    /// The odd-rational pattern, if any: one central generator bounds
    /// while the other two agree up to homotopy without bounding. The
    /// twisted special forms bound all three and match no pattern.
    pub fn pattern(&self) -> Option<Basing> {
        match (self.d_filled, self.d_hollow, self.s2) {
            (false, true, false) if self.d_filled_eq_s2 => Some(Basing::Horizontal),
            (false, false, true) if self.d_filled_eq_d_hollow => Some(Basing::Diagonal),
            (true, false, false) if self.d_hollow_eq_s2 => Some(Basing::Vertical),
            _ => None,
        }
    }
}

pub fn central_record(x: &TypeD) -> CentralRecord {
    let act = |z| central_action(z, x);
    let null = |f: &crate::typed::MorElem| {
        is_nullhomotopic(f, x, x).expect("central actions are chain maps")
    };
    let (df, dh, s2) =
        (act(CentralElem::DFilled), act(CentralElem::DHollow), act(CentralElem::S2));
    CentralRecord {
        h: null(&act(CentralElem::H)),
        d_filled: null(&df),
        d_hollow: null(&dh),
        s2: null(&s2),
        d_filled_eq_s2: null(&df.add(&s2)),
        d_hollow_eq_s2: null(&dh.add(&s2)),
        d_filled_eq_d_hollow: null(&df.add(&dh)),
    }
}

/// Detects the basing of a rational curve component: exactly one of the
/// three central generators bounds (`D_∘` for horizontal, `S²` for
/// diagonal, `D_•` for vertical) and the remaining two are homotopic.
pub fn detected_basing(x: &TypeD) -> Option<Basing> {
    central_record(x).pattern()
}

// ---------------------------------------------------------------------------
// Seeded random complexes (valid by construction)

/// A pseudorandom complex: a direct sum of standard pieces and acyclic
/// identity pairs, scrambled by random degree-0 base changes. Valid by
/// construction since every step preserves the structure relations.
pub fn random_complex(seed: u64) -> TypeD {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: Vec<TypeD> = Vec::new();
    for _ in 0..rng.gen_range(1..=3usize) {
        let end = if rng.gen_bool(0.5) { SlopeEnd::Zero } else { SlopeEnd::Infinity };
        parts.push(match rng.gen_range(0..4usize) {
            0 => rational_complex(1, end),
            1 => rational_complex(2, end),
            2 => special_complex(1, end),
            _ => {
                let mut p = TypeD::new();
                let idem = if rng.gen_bool(0.5) { Idem::Filled } else { Idem::Hollow };
                p.add_gen("pt", idem, Bigrading::ZERO);
                p
            }
        });
    }
    for k in 0..rng.gen_range(0..=2usize) {
        let idem = if rng.gen_bool(0.5) { Idem::Filled } else { Idem::Hollow };
        let q = rng.gen_range(-2..=2i32);
        let d2 = q - 2 * rng.gen_range(-1..=1i32);
        let mut p = TypeD::new();
        let a = p.add_gen(format!("id{k}a"), idem, Bigrading::new(q, d2));
        let b = p.add_gen(format!("id{k}b"), idem, Bigrading::new(q, d2 - 2));
        p.add_arrow(a, b, AlgElem::from_path(BasisPath::unit(idem)));
        parts.push(p);
    }
    let refs: Vec<&TypeD> = parts.iter().collect();
    let mut x = TypeD::direct_sum(&refs);
    for _ in 0..rng.gen_range(1..=6usize) {
        let cands: Vec<_> = mor_basis(&x, &x, Bigrading::ZERO)
            .into_iter()
            .filter(|&(u, v, _)| u != v)
            .collect();
        if cands.is_empty() {
            break;
        }
        let (u, v, p) = cands[rng.gen_range(0..cands.len())];
        let mut g = crate::typed::MorElem::zero(Bigrading::ZERO);
        g.add_entry(u, v, AlgElem::from_path(p));
        x = base_change(&x, &g).expect("single off-diagonal entries are nilpotent");
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::{mor_homology, HomologyWindow};

    #[test]
    fn slope_arithmetic() {
        assert_eq!(Slope::new(2, 4), Slope::new(1, 2));
        assert_eq!(Slope::new(1, -2), Slope::new(-1, 2));
        assert_eq!(Slope::new(-3, 0), Slope::INFINITY);
        assert_eq!(TwistLetter::T1.on_slope(Slope::new(0, 1)), Slope::integer(1));
        assert_eq!(TwistLetter::T2.on_slope(Slope::INFINITY), Slope::integer(1));
        assert_eq!(TwistLetter::T2.on_slope(Slope::integer(1)), Slope::new(1, 2));
        assert_eq!(TwistLetter::T2Inv.on_slope(Slope::integer(-1)), Slope::new(-1, 2));
        assert_eq!("2/3".parse::<Slope>().unwrap(), Slope::new(2, 3));
        assert_eq!("inf".parse::<Slope>().unwrap(), Slope::INFINITY);
        assert_eq!("-2".parse::<Slope>().unwrap(), Slope::integer(-2));
    }

    #[test]
    fn words_reach_their_slopes() {
        let targets = [
            Slope::new(0, 1),
            Slope::INFINITY,
            Slope::integer(1),
            Slope::integer(-1),
            Slope::integer(2),
            Slope::new(1, 2),
            Slope::new(-1, 2),
            Slope::new(2, 3),
            Slope::new(-7, 5),
            Slope::new(13, 4),
        ];
        for s in targets {
            let w = word_for_slope(s);
            assert_eq!(slope_of_word(&w), s, "word {w:?}");
        }
        assert_eq!(word_for_slope(Slope::new(1, 2)), vec![TwistLetter::T1, TwistLetter::T2]);
    }

    #[test]
    fn standard_complexes_are_valid() {
        for n in 1..=3 {
            for end in [SlopeEnd::Zero, SlopeEnd::Infinity] {
                let r = rational_complex(n, end);
                r.check().unwrap();
                assert_eq!(r.gen_count(), 2 * n);
                let s = special_complex(n, end);
                s.check().unwrap();
                assert_eq!(s.gen_count(), 4 * n + 4);
            }
        }
    }

    #[test]
    fn half_twist_offsets_match_the_action_table() {
        let b = TwistLetter::T1.bimodule();
        assert_eq!(b.bgens()[0].offset, Bigrading::ZERO);
        assert_eq!(b.bgens()[1].offset, Bigrading::new(1, -1));
        assert_eq!(b.bgens()[2].offset, Bigrading::new(2, 0));
    }

    #[test]
    fn twisting_the_rational_zero_curve_once_gives_the_slope_one_form() {
        let r1 = rational_complex(1, SlopeEnd::Zero);
        let t = apply_twist(&r1, TwistLetter::T1);
        t.check().unwrap();
        assert_eq!(t.gen_count(), 4);
        // slanted square: two S rungs and two straightenable verticals
        let classes = classify(&t);
        assert_eq!(classes.len(), 1);
        match &classes[0] {
            ComponentClass::Curve { kind, n, slope, .. } => {
                assert_eq!(*kind, CurveKind::Rational);
                assert_eq!(*n, 1);
                assert_eq!(*slope, Slope::integer(1));
            }
            other => panic!("unexpected class {other:?}"),
        }
    }

    #[test]
    fn t2_fixes_the_slope_zero_curve() {
        let r1 = rational_complex(1, SlopeEnd::Zero);
        let t = apply_twist(&r1, TwistLetter::T2);
        assert!(are_isomorphic(&crate::simplify::straighten(&t), &r1));
    }

    #[test]
    fn t1_fixes_the_slope_infinity_curve() {
        let ri = rational_complex(1, SlopeEnd::Infinity);
        let t = apply_twist(&ri, TwistLetter::T1);
        assert!(are_isomorphic(&crate::simplify::straighten(&t), &ri));
    }

    #[test]
    fn twists_round_trip_up_to_isomorphism() {
        let fixtures = [
            rational_complex(1, SlopeEnd::Zero),
            rational_complex(2, SlopeEnd::Zero),
            rational_complex(1, SlopeEnd::Infinity),
            special_complex(1, SlopeEnd::Zero),
        ];
        for x in &fixtures {
            for l in TwistLetter::ALL {
                let there = apply_twist(x, l);
                let back = apply_twist(&there, l.inverse());
                assert!(
                    are_isomorphic(&crate::simplify::straighten(&back), &crate::simplify::straighten(x)),
                    "{l} round trip failed on a {} generator complex",
                    x.gen_count()
                );
            }
        }
    }

    #[test]
    fn classification_follows_slope_words() {
        let r1 = rational_complex(1, SlopeEnd::Zero);
        for s in [Slope::integer(1), Slope::new(1, 2), Slope::integer(-1), Slope::new(2, 3)] {
            let x = apply_word(&r1, &word_for_slope(s));
            let classes = classify(&x);
            assert_eq!(classes.len(), 1, "slope {s}");
            match &classes[0] {
                ComponentClass::Curve { kind: CurveKind::Rational, n: 1, slope, .. } => {
                    assert_eq!(*slope, s)
                }
                other => panic!("slope {s}: unexpected class {other:?}"),
            }
        }
    }

    #[test]
    fn rational_generator_counts_follow_the_slope() {
        // r₁(p/q) has 2|q| filled and 2|p| hollow generators.
        let r1 = rational_complex(1, SlopeEnd::Zero);
        for s in [Slope::integer(1), Slope::new(1, 2), Slope::new(2, 3)] {
            let x = apply_word(&r1, &word_for_slope(s));
            let hollow = x.gens().iter().filter(|g| g.idem == Idem::Hollow).count();
            let filled = x.gen_count() - hollow;
            assert_eq!(filled, 2 * s.q.unsigned_abs() as usize, "slope {s}");
            assert_eq!(hollow, 2 * s.p.unsigned_abs() as usize, "slope {s}");
        }
    }

    #[test]
    fn special_component_classifies_after_twisting() {
        let s1 = special_complex(1, SlopeEnd::Zero);
        let x = apply_twist(&s1, TwistLetter::T1);
        let classes = classify(&x);
        assert_eq!(classes.len(), 1);
        match &classes[0] {
            ComponentClass::Curve { kind: CurveKind::Special, n: 1, slope, .. } => {
                assert_eq!(*slope, Slope::integer(1))
            }
            other => panic!("unexpected class {other:?}"),
        }
    }

    #[test]
    fn basing_detection_matches_slope_parity() {
        let r1 = rational_complex(1, SlopeEnd::Zero);
        assert_eq!(detected_basing(&r1), Some(Basing::Horizontal));
        assert_eq!(
            detected_basing(&rational_complex(1, SlopeEnd::Infinity)),
            Some(Basing::Vertical)
        );
        let diag = apply_twist(&r1, TwistLetter::T1);
        assert_eq!(detected_basing(&diag), Some(Basing::Diagonal));

        // the special form bounds all three centrals and matches nothing
        let s = special_complex(1, SlopeEnd::Zero);
        assert_eq!(central_vanishing(&s), [true, true, true]);
        assert_eq!(detected_basing(&s), None);

        for (s, b) in [
            (Slope::new(0, 1), Basing::Horizontal),
            (Slope::INFINITY, Basing::Vertical),
            (Slope::new(1, 2), Basing::Vertical),
            (Slope::new(3, 5), Basing::Diagonal),
            (Slope::new(-1, 2), Basing::Vertical),
            (Slope::new(2, 3), Basing::Horizontal),
        ] {
            assert_eq!(basing_from_slope(s), b, "slope {s}");
        }
    }

    #[test]
    fn twist_letters_permute_basings() {
        let r1 = rational_complex(1, SlopeEnd::Zero);
        for s in [Slope::new(0, 1), Slope::integer(1), Slope::INFINITY] {
            let x = apply_word(&r1, &word_for_slope(s));
            for l in TwistLetter::ALL {
                let y = apply_twist(&x, l);
                assert_eq!(
                    detected_basing(&y),
                    Some(basing_from_slope(l.on_slope(s))),
                    "letter {l} at slope {s}"
                );
            }
        }
    }

    #[test]
    fn random_complexes_are_valid_and_probe_stable() {
        let probe = rational_complex(1, SlopeEnd::Zero);
        for seed in 0..6u64 {
            let x = random_complex(seed);
            x.check().unwrap();
            let r = reduce(&x).complex;
            r.check().unwrap();
            let a = mor_homology(&x, &probe, HomologyWindow::default());
            let b = mor_homology(&r, &probe, HomologyWindow::default());
            assert_eq!(a.dims, b.dims, "seed {seed}");
        }
    }
}
