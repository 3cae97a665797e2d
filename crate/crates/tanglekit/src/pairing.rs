//! Gluing two tangles: mirrors, the pairing of their invariants as
//! morphism homology, the V-factor bookkeeping relating the two forms of
//! the glued answer, and an independent reduced Khovanov oracle on the
//! closed diagram that cross-checks every pairing result.

use std::collections::BTreeMap;

use rayon::join;
use thiserror::Error;

use crate::algebra::Bigrading;
use crate::cube::{cube_complex, khovanov_complex};
use crate::diagrams::{smoothing_slot_pairs, End, TangleDiagram};
use crate::hom::{mor_homology, HomologyWindow};
use crate::simplify::reduce;
use crate::typed::TypeD;

#[derive(Debug, Error)]
pub enum PairingError {
    #[error("gluing needs opposite orientations at {end}; both strands point {dir} there")]
    Orientation { end: &'static str, dir: &'static str },
    #[error("morphism homology window ({0}, {1}) did not stabilize")]
    Window(i32, i32),
}

/// The two-dimensional grading content of the extra tensor factor: one
/// class at each of q = ±1, both one 2δ step up.
pub const V_GRADINGS: [Bigrading; 2] =
    [Bigrading { q: 1, delta2: 1 }, Bigrading { q: -1, delta2: 1 }];

/// A relatively bigraded dimension table: the support is translated so
/// that the minimal q and the minimal 2δ are both zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigradedDims(BTreeMap<Bigrading, usize>);

impl BigradedDims {
    pub fn new(dims: impl IntoIterator<Item = (Bigrading, usize)>) -> Self {
        let dims: BTreeMap<Bigrading, usize> =
            dims.into_iter().filter(|&(_, d)| d > 0).collect();
        let Some(qmin) = dims.keys().map(|g| g.q).min() else {
            return BigradedDims(BTreeMap::new());
        };
        let dmin = dims.keys().map(|g| g.delta2).min().unwrap();
        BigradedDims(
            dims.into_iter()
                .map(|(g, d)| (Bigrading::new(g.q - qmin, g.delta2 - dmin), d))
                .collect(),
        )
    }

    pub fn dims(&self) -> &BTreeMap<Bigrading, usize> {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    /// Total dimension per 2δ row.
    pub fn delta_rows(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (g, &d) in &self.0 {
            *out.entry(g.delta2).or_insert(0) += d;
        }
        out
    }

    /// The table after tensoring with the V factor: every class spawns
    /// one copy at q+1 and one at q−1, both one 2δ step up.
    pub fn tensor_v(&self) -> BigradedDims {
        let mut out: BTreeMap<Bigrading, usize> = BTreeMap::new();
        for (g, &d) in &self.0 {
            for v in V_GRADINGS {
                *out.entry(*g + v).or_insert(0) += d;
            }
        }
        BigradedDims::new(out)
    }
}

/// The invariant of the mirror tangle is the dual complex; only relative
/// gradings survive the reflection.
pub fn mirror(x: &TypeD) -> TypeD {
    x.dual()
}

/// Pairing of two invariants as the homology of their morphism complex,
/// over a certified stabilization window, relatively normalized.
pub fn hf(x: &TypeD, y: &TypeD, win: HomologyWindow) -> Result<BigradedDims, PairingError> {
    let h = mor_homology(x, y, win);
    if !h.stabilized {
        return Err(PairingError::Window(h.window.0, h.window.1));
    }
    Ok(BigradedDims::new(h.dims))
}

fn check_orientations(t1: &TangleDiagram, t2: &TangleDiagram) -> Result<(), PairingError> {
    let o1 = t1.end_outward();
    let o2 = t2.end_outward();
    for e in 0..4 {
        if o1[e] == o2[e] {
            return Err(PairingError::Orientation {
                end: End::ALL[e].key(),
                dir: if o1[e] { "outward" } else { "inward" },
            });
        }
    }
    Ok(())
}

/// Reorients open strands on both sides until every glued end pair has
/// one inward and one outward strand. Always possible (the glued link is
/// orientable); deterministic (each component is traversed from its
/// smallest end, entering the first diagram).
pub fn orient_for_gluing(
    t1: &TangleDiagram,
    t2: &TangleDiagram,
) -> (TangleDiagram, TangleDiagram) {
    let (c1, c2) = (t1.connectivity(), t2.connectivity());
    let mut want1 = [None::<bool>; 4];
    for start in 0..4 {
        if want1[start].is_some() {
            continue;
        }
        let mut e = start;
        loop {
            let x = c1.partner(e);
            want1[e] = Some(false);
            want1[x] = Some(true);
            e = c2.partner(x);
            if e == start {
                break;
            }
        }
    }
    let mut a = t1.clone();
    let mut b = t2.clone();
    for e in 0..4 {
        if a.end_outward()[e] != want1[e].unwrap() {
            a = a.reverse_strand_at(End::ALL[e]);
        }
        if b.end_outward()[e] == want1[e].unwrap() {
            b = b.reverse_strand_at(End::ALL[e]);
        }
    }
    debug_assert!(check_orientations(&a, &b).is_ok());
    (a, b)
}

/// Both forms of the glued answer for the link `T₁ ∪ T₂`: the pairing of
/// the two passive invariants carries an extra V factor, pairing against
/// the active (uncompleted) invariant of `T₂` gives the bare answer.
#[derive(Clone, Debug)]
pub struct GlueReport {
    pub khr_times_v: BigradedDims,
    pub khr_direct: BigradedDims,
    /// Whether `khr_times_v` equals `khr_direct ⊗ V` as relative tables.
    pub consistent: bool,
}

pub fn glue(
    t1: &TangleDiagram,
    t2: &TangleDiagram,
    win: HomologyWindow,
) -> Result<GlueReport, PairingError> {
    check_orientations(t1, t2)?;
    let (left, (kh2, bn2)) = join(
        || mirror(&reduce(&khovanov_complex(t1)).complex),
        || {
            join(
                || reduce(&khovanov_complex(t2)).complex,
                || reduce(&cube_complex(t2)).complex,
            )
        },
    );
    let (tv, direct) = join(|| hf(&left, &kh2, win), || hf(&left, &bn2, win));
    let khr_times_v = tv?;
    let khr_direct = direct?;
    let consistent = khr_times_v == khr_direct.tensor_v();
    Ok(GlueReport { khr_times_v, khr_direct, consistent })
}

// ---------------------------------------------------------------------------
// Closed diagrams and the reduced Khovanov oracle

/// A closed diagram: two glued tangles with the four boundary arcs
/// identified, leaving no open ends. The basepoint is the image of the
/// first tangle's marked NW arc.
#[derive(Clone, Debug)]
pub struct LinkDiagram {
    /// Slot arcs counterclockwise from southwest, plus the over parity.
    crossings: Vec<([usize; 4], u8)>,
    arcs: usize,
    basepoint: usize,
    pos: usize,
    neg: usize,
}

struct Uf(Vec<usize>);

impl Uf {
    fn new(n: usize) -> Uf {
        Uf((0..n).collect())
    }

    fn find(&mut self, a: usize) -> usize {
        if self.0[a] != a {
            let r = self.find(self.0[a]);
            self.0[a] = r;
        }
        self.0[a]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.0[hi] = lo;
    }
}

/// Identifies the two diagrams end for end (NW to NW and so on) into a
/// closed diagram. Orientations must already be glue-compatible.
pub fn closure(t1: &TangleDiagram, t2: &TangleDiagram) -> Result<LinkDiagram, PairingError> {
    check_orientations(t1, t2)?;
    let n1 = t1.arc_count();
    let total = n1 + t2.arc_count();
    let mut uf = Uf::new(total);
    for e in 0..4 {
        uf.union(t1.ends[e], n1 + t2.ends[e]);
    }
    let mut label = vec![usize::MAX; total];
    let mut arcs = 0;
    for a in 0..total {
        let r = uf.find(a);
        if label[r] == usize::MAX {
            label[r] = arcs;
            arcs += 1;
        }
        label[a] = label[r];
    }
    let mut crossings = Vec::new();
    for c in &t1.crossings {
        crossings.push((c.slots.map(|a| label[a]), c.over));
    }
    for c in &t2.crossings {
        crossings.push((c.slots.map(|a| label[n1 + a]), c.over));
    }
    let (p1, m1) = t1.writhe_data();
    let (p2, m2) = t2.writhe_data();
    Ok(LinkDiagram {
        crossings,
        arcs,
        basepoint: label[t1.ends[0]],
        pos: p1 + p2,
        neg: m1 + m2,
    })
}

impl LinkDiagram {
    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    /// Number of link components: strands pass straight through every
    /// crossing.
    pub fn components(&self) -> usize {
        let mut uf = Uf::new(self.arcs);
        for &(slots, _) in &self.crossings {
            uf.union(slots[0], slots[2]);
            uf.union(slots[1], slots[3]);
        }
        (0..self.arcs).filter(|&a| uf.find(a) == a).count()
    }

    /// Circles of one resolution, each as its sorted arc set.
    fn resolve(&self, v: u32) -> Vec<Vec<usize>> {
        let mut uf = Uf::new(self.arcs);
        for (k, &(slots, over)) in self.crossings.iter().enumerate() {
            for (s, t) in smoothing_slot_pairs(over, v >> k & 1 == 1) {
                uf.union(slots[s], slots[t]);
            }
        }
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 0..self.arcs {
            members.entry(uf.find(a)).or_default().push(a);
        }
        members.into_values().collect()
    }
}

/// Reduced Khovanov homology of a closed diagram over F₂: the rank-two
/// Frobenius cube with the basepoint circle pinned to the x label,
/// reported with the same relative normalization as [`hf`].
pub fn reduced_kh_oracle(l: &LinkDiagram) -> BigradedDims {
    let n = l.crossings.len();
    assert!(n < 26, "oracle cube with {n} crossings is out of reach");
    let shift = l.pos as i32 - 2 * l.neg as i32;

    // Generators: (vertex, label bits), bit set = x. The basepoint
    // circle is always x. Indexed per (q, h) group.
    let resolutions: Vec<Vec<Vec<usize>>> = (0..1u32 << n).map(|v| l.resolve(v)).collect();
    let base_circle = |circles: &[Vec<usize>]| {
        circles
            .iter()
            .position(|c| c.contains(&l.basepoint))
            .expect("basepoint lies on some circle")
    };

    let mut index: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut groups: BTreeMap<(i32, i32), Vec<(u32, u32)>> = BTreeMap::new();
    for (v, circles) in resolutions.iter().enumerate() {
        let v = v as u32;
        let c = circles.len();
        let bp = base_circle(circles);
        let h = v.count_ones() as i32 - l.neg as i32;
        for labels in 0..1u32 << c {
            if labels >> bp & 1 == 0 {
                continue;
            }
            let xs = labels.count_ones() as i32;
            let q = v.count_ones() as i32 + shift + (c as i32 - xs) - xs;
            let g = groups.entry((q, h)).or_default();
            index.insert((v, labels), g.len());
            g.push((v, labels));
        }
    }

    let edge_terms = |v: u32, labels: u32, k: usize| -> Vec<(u32, u32)> {
        let a = &resolutions[v as usize];
        let b = &resolutions[(v | 1 << k) as usize];
        let in_b: BTreeMap<&[usize], usize> =
            b.iter().enumerate().map(|(j, s)| (s.as_slice(), j)).collect();
        let in_a: BTreeMap<&[usize], usize> =
            a.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let gone: Vec<usize> =
            (0..a.len()).filter(|&i| !in_b.contains_key(a[i].as_slice())).collect();
        let born: Vec<usize> =
            (0..b.len()).filter(|&j| !in_a.contains_key(b[j].as_slice())).collect();
        let mut base = 0u32;
        for (i, arcs) in a.iter().enumerate() {
            if let Some(&j) = in_b.get(arcs.as_slice()) {
                if labels >> i & 1 == 1 {
                    base |= 1 << j;
                }
            }
        }
        let x = |i: usize| labels >> i & 1 == 1;
        let w = v | 1 << k;
        match (gone.as_slice(), born.as_slice()) {
            (&[i, j], &[m]) => match (x(i), x(j)) {
                (false, false) => vec![(w, base)],
                (true, false) | (false, true) => vec![(w, base | 1 << m)],
                (true, true) => vec![],
            },
            (&[i], &[m, m2]) => {
                if x(i) {
                    vec![(w, base | 1 << m | 1 << m2)]
                } else {
                    vec![(w, base | 1 << m), (w, base | 1 << m2)]
                }
            }
            other => unreachable!(
                "saddle changed {} into {} circles",
                other.0.len(),
                other.1.len()
            ),
        }
    };

    let mut dims: BTreeMap<Bigrading, usize> = BTreeMap::new();
    let empty = Vec::new();
    for (&(q, h), src) in &groups {
        let tgt = groups.get(&(q, h + 1)).unwrap_or(&empty);
        let mut out = crate::f2::BitMat::zero(tgt.len(), src.len());
        for (c, &(v, labels)) in src.iter().enumerate() {
            for k in 0..n {
                if v >> k & 1 != 0 {
                    continue;
                }
                for key in edge_terms(v, labels, k) {
                    out.flip(index[&key], c);
                }
            }
        }
        let prev = groups.get(&(q, h - 1)).unwrap_or(&empty);
        let mut inc = crate::f2::BitMat::zero(src.len(), prev.len());
        for (c, &(v, labels)) in prev.iter().enumerate() {
            for k in 0..n {
                if v >> k & 1 != 0 {
                    continue;
                }
                for key in edge_terms(v, labels, k) {
                    inc.flip(index[&key], c);
                }
            }
        }
        let d = src.len() - out.rank() - inc.rank();
        if d > 0 {
            dims.insert(Bigrading::new(q, q - 2 * h), d);
        }
    }
    BigradedDims::new(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Slope;
    use crate::diagrams::{
        horizontal_tangle, pretzel_tangle, rational_tangle, vertical_tangle,
    };

    fn win() -> HomologyWindow {
        HomologyWindow::default()
    }

    #[test]
    fn unknot_closures_have_dimension_one() {
        let (a, b) = orient_for_gluing(&horizontal_tangle(), &vertical_tangle());
        let l = closure(&a, &b).unwrap();
        assert_eq!(l.components(), 1);
        let table = reduced_kh_oracle(&l);
        assert_eq!(table.total(), 1);
    }

    #[test]
    fn two_component_unlink_closure() {
        let (a, b) = orient_for_gluing(&horizontal_tangle(), &horizontal_tangle());
        let l = closure(&a, &b).unwrap();
        assert_eq!(l.components(), 2);
        let table = reduced_kh_oracle(&l);
        assert_eq!(table.total(), 2);
    }

    #[test]
    fn oracle_matches_textbook_totals() {
        // numerator closures of twist forms: trefoil and figure eight
        let (a, b) = orient_for_gluing(&pretzel_tangle(2, -5).unwrap(), &horizontal_tangle());
        let trefoil = reduced_kh_oracle(&closure(&a, &b).unwrap());
        assert_eq!(trefoil.total(), 3);
        assert_eq!(trefoil.delta_rows().len(), 1, "trefoil is thin");

        let (a, b) = orient_for_gluing(&horizontal_tangle(), &rational_tangle(Slope::new(5, 2)));
        let l = closure(&a, &b).unwrap();
        assert_eq!(l.components(), 1);
        let fig8 = reduced_kh_oracle(&l);
        assert_eq!(fig8.total(), 5);
        assert_eq!(fig8.delta_rows().len(), 1, "figure eight is thin");
    }

    #[test]
    fn glue_agrees_with_the_oracle_and_itself() {
        let pairs = vec![
            (horizontal_tangle(), vertical_tangle()),
            (horizontal_tangle(), horizontal_tangle()),
            (pretzel_tangle(2, -3).unwrap(), horizontal_tangle()),
            (pretzel_tangle(2, -3).unwrap(), vertical_tangle()),
            (pretzel_tangle(2, -5).unwrap(), horizontal_tangle()),
            (horizontal_tangle(), rational_tangle(Slope::new(5, 2))),
        ];
        for (t1, t2) in pairs {
            let (a, b) = orient_for_gluing(&t1, &t2);
            let report = glue(&a, &b, win()).unwrap();
            assert!(report.consistent, "V-factor relation failed");
            assert_eq!(
                report.khr_times_v.total(),
                2 * report.khr_direct.total(),
                "total dimensions"
            );
            let oracle = reduced_kh_oracle(&closure(&a, &b).unwrap());
            assert_eq!(report.khr_direct, oracle, "oracle disagrees");
        }
    }

    #[test]
    fn gluing_is_symmetric_in_total_dimension() {
        let pairs = vec![
            (horizontal_tangle(), vertical_tangle()),
            (pretzel_tangle(2, -3).unwrap(), horizontal_tangle()),
            (pretzel_tangle(2, -5).unwrap(), horizontal_tangle()),
        ];
        for (t1, t2) in pairs {
            let (a, b) = orient_for_gluing(&t1, &t2);
            let (a2, b2) = orient_for_gluing(&t2, &t1);
            let fwd = glue(&a, &b, win()).unwrap();
            let back = glue(&a2, &b2, win()).unwrap();
            assert_eq!(fwd.khr_direct.total(), back.khr_direct.total());
        }
    }

    #[test]
    fn knot_closures_are_odd_dimensional() {
        let tangles = vec![
            (horizontal_tangle(), vertical_tangle()),
            (pretzel_tangle(2, -3).unwrap(), horizontal_tangle()),
            (pretzel_tangle(2, -5).unwrap(), horizontal_tangle()),
            (horizontal_tangle(), rational_tangle(Slope::new(5, 2))),
        ];
        for (t1, t2) in tangles {
            let (a, b) = orient_for_gluing(&t1, &t2);
            let l = closure(&a, &b).unwrap();
            if l.components() == 1 {
                assert_eq!(reduced_kh_oracle(&l).total() % 2, 1);
            }
        }
    }

    #[test]
    fn orientation_mismatch_is_an_error() {
        let q0 = horizontal_tangle();
        assert!(matches!(
            glue(&q0, &q0, win()),
            Err(PairingError::Orientation { .. })
        ));
    }

    #[test]
    fn mirror_negates_rational_slopes() {
        let x = khovanov_complex(&rational_tangle(Slope::new(1, 2)));
        let classes = crate::curves::classify(&mirror(&x));
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].to_string(), "r1(-1/2)");
    }

    #[test]
    fn hf_is_reduction_invariant_and_kills_zero() {
        let p = pretzel_tangle(2, -3).unwrap();
        let x = khovanov_complex(&p);
        let red = reduce(&x).complex;
        let probe = khovanov_complex(&horizontal_tangle());
        let via_full = hf(&mirror(&probe), &x, win()).unwrap();
        let via_red = hf(&mirror(&probe), &red, win()).unwrap();
        assert_eq!(via_full, via_red);

        assert_eq!(hf(&red, &TypeD::new(), win()).unwrap().total(), 0);
    }

    #[test]
    fn self_pairing_of_the_zero_curve_is_four_dimensional() {
        let r = crate::curves::rational_complex(1, crate::curves::SlopeEnd::Zero);
        let table = hf(&mirror(&r), &r, win()).unwrap();
        assert_eq!(table.total(), 4);
    }
}
