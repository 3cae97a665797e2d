//! The cube of resolutions of a tangle diagram, delooped: circles in a
//! resolution carry a `1`/`y` mark instead of contributing a tensor
//! factor, so every cube vertex yields finitely many generators over
//! the arc algebra and the saddle maps carry algebra coefficients.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::{AlgElem, BasisPath, Bigrading, Idem};
use crate::diagrams::{ArcClass, ResolvedDiagram, TangleDiagram};
use crate::simplify::reduce;
use crate::typed::{central_action, cone, CentralElem, TypeD};

/// A delooped generator: the vertex code plus one label bit per circle.
type Key = (u32, u32);

fn idem_of(eps: u8) -> Idem {
    if eps == 0 {
        Idem::Filled
    } else {
        Idem::Hollow
    }
}

struct Builder {
    /// Resolutions indexed by vertex code; bit `k` is crossing `k`.
    rs: Vec<ResolvedDiagram>,
    n: usize,
    pos: usize,
    neg: usize,
}

impl Builder {
    fn new(d: &TangleDiagram) -> Builder {
        let n = d.crossing_count();
        assert!(n < 26, "cube with {n} crossings is out of reach");
        let rs: Vec<ResolvedDiagram> = (0..1u32 << n)
            .into_par_iter()
            .map(|v| d.resolve(&(0..n).map(|k| v >> k & 1 == 1).collect::<Vec<_>>()))
            .collect();
        let (pos, neg) = d.writhe_data();
        Builder { rs, n, pos, neg }
    }

    fn gen_id(&self, v: u32, circles: usize, labels: u32) -> String {
        let bits: String =
            (0..self.n).map(|k| if v >> k & 1 == 1 { '1' } else { '0' }).collect();
        if circles == 0 {
            return format!("v{bits}");
        }
        let marks: String =
            (0..circles).map(|c| if labels >> c & 1 == 1 { 'y' } else { '1' }).collect();
        format!("v{bits}:{marks}")
    }

    fn grading(&self, v: u32, circles: usize, labels: u32) -> Bigrading {
        let h = v.count_ones() as i32 - self.neg as i32;
        let ys = labels.count_ones() as i32;
        let q = v.count_ones() as i32 + self.pos as i32 - 2 * self.neg as i32
            + (circles as i32 - ys)
            - ys;
        Bigrading::new(q, q - 2 * h)
    }

    /// Entries of the saddle for flipping crossing `k` at `(v, labels)`,
    /// as `(labels', coefficient)` on the vertex `v | 1 << k`.
    fn saddle(&self, v: u32, labels: u32, k: usize) -> Vec<(u32, AlgElem)> {
        let a = &self.rs[v as usize];
        let b = &self.rs[(v | 1 << k) as usize];
        let idem = idem_of(a.eps);
        let unit = AlgElem::from_path(BasisPath::unit(idem));
        if a.eps != b.eps {
            debug_assert_eq!(a.circle_arcs, b.circle_arcs, "a reroute keeps the circles");
            return vec![(labels, AlgElem::from_path(BasisPath::s(1, idem)))];
        }
        fn ids(r: &ResolvedDiagram) -> BTreeMap<&[usize], usize> {
            r.circle_arcs.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect()
        }
        let in_a = ids(a);
        let in_b = ids(b);
        let gone: Vec<usize> =
            (0..a.circles()).filter(|&i| !in_b.contains_key(a.circle_arcs[i].as_slice())).collect();
        let born: Vec<usize> =
            (0..b.circles()).filter(|&j| !in_a.contains_key(b.circle_arcs[j].as_slice())).collect();
        let mut base = 0u32;
        for (i, arcs) in a.circle_arcs.iter().enumerate() {
            if let Some(&j) = in_b.get(arcs.as_slice()) {
                if labels >> i & 1 == 1 {
                    base |= 1 << j;
                }
            }
        }
        let h = CentralElem::H.label_at(idem);
        let y = |i: usize| labels >> i & 1 == 1;
        match (gone.as_slice(), born.as_slice()) {
            (&[i, j], &[k2]) => {
                let mark = if y(i) || y(j) { 1 << k2 } else { 0 };
                let coeff = if y(i) && y(j) { h } else { unit };
                vec![(base | mark, coeff)]
            }
            (&[i], &[]) => {
                let marked = b.arc_class[a.circle_arcs[i][0]] == ArcClass::Marked;
                let coeff = match (y(i), marked) {
                    (false, _) => unit,
                    (true, true) => h,
                    (true, false) => AlgElem::from_path(BasisPath::s(2, idem)),
                };
                vec![(base, coeff)]
            }
            (&[i], &[j, k2]) => {
                if y(i) {
                    vec![(base | 1 << j | 1 << k2, unit)]
                } else {
                    vec![
                        (base | 1 << j, unit.clone()),
                        (base | 1 << k2, unit),
                        (base, h),
                    ]
                }
            }
            (&[], &[j]) => {
                let marked = a.arc_class[b.circle_arcs[j][0]] == ArcClass::Marked;
                if marked {
                    vec![(base | 1 << j, unit)]
                } else {
                    vec![
                        (base | 1 << j, unit),
                        (base, AlgElem::from_path(BasisPath::d(1, idem))),
                    ]
                }
            }
            other => unreachable!("saddle changed {} circles and {} strands", other.0.len(), other.1.len()),
        }
    }

    fn full(&self) -> TypeD {
        let mut x = TypeD::new();
        let mut index: BTreeMap<Key, usize> = BTreeMap::new();
        for v in 0..1u32 << self.n {
            let r = &self.rs[v as usize];
            for labels in 0..1u32 << r.circles() {
                let idx = x.add_gen(
                    self.gen_id(v, r.circles(), labels),
                    idem_of(r.eps),
                    self.grading(v, r.circles(), labels),
                );
                index.insert((v, labels), idx);
            }
        }
        let entries: Vec<(Key, Key, AlgElem)> = (0..1u32 << self.n)
            .into_par_iter()
            .flat_map_iter(|v| {
                let mut out = Vec::new();
                for k in 0..self.n {
                    if v >> k & 1 != 0 {
                        continue;
                    }
                    for labels in 0..1u32 << self.rs[v as usize].circles() {
                        for (l2, coeff) in self.saddle(v, labels, k) {
                            out.push(((v, labels), (v | 1 << k, l2), coeff));
                        }
                    }
                }
                out
            })
            .collect();
        for (src, dst, coeff) in entries {
            x.add_arrow(index[&src], index[&dst], coeff);
        }
        x
    }

    /// Reduced model of the sub-cube where crossings `free..n` are fixed
    /// to `suffix`, together with the chain maps into and out of the
    /// span of raw cube generators. The transports are what let the
    /// connecting saddle map act on an already-reduced half.
    fn sub(&self, free: usize, suffix: u32) -> Transport {
        if free == 0 {
            let r = &self.rs[suffix as usize];
            let unit = AlgElem::from_path(BasisPath::unit(idem_of(r.eps)));
            let mut complex = TypeD::new();
            let mut include = Vec::new();
            let mut project = BTreeMap::new();
            for labels in 0..1u32 << r.circles() {
                let idx = complex.add_gen(
                    self.gen_id(suffix, r.circles(), labels),
                    idem_of(r.eps),
                    self.grading(suffix, r.circles(), labels),
                );
                include.push(BTreeMap::from([((suffix, labels), unit.clone())]));
                project.insert((suffix, labels), vec![(idx, unit.clone())]);
            }
            return Transport { complex, include, project };
        }
        let k = free - 1;
        let (a, b) = rayon::join(|| self.sub(k, suffix), || self.sub(k, suffix | 1 << k));
        let na = a.complex.gen_count();
        let mut c = TypeD::new();
        for g in a.complex.gens().iter().chain(b.complex.gens()) {
            c.add_gen(g.id.clone(), g.idem, g.gr);
        }
        for (s, d, l) in a.complex.arrows() {
            c.add_arrow(s, d, l.clone());
        }
        for (s, d, l) in b.complex.arrows() {
            c.add_arrow(na + s, na + d, l.clone());
        }
        for (ai, row) in a.include.iter().enumerate() {
            let mut out: BTreeMap<usize, AlgElem> = BTreeMap::new();
            for (&(v, labels), ca) in row {
                debug_assert_eq!(v >> k & 1, 0);
                for (l2, cf) in self.saddle(v, labels, k) {
                    if let Some(list) = b.project.get(&(v | 1 << k, l2)) {
                        for (bi, cb) in list {
                            acc(&mut out, *bi, cb.mul(&cf.mul(ca)));
                        }
                    }
                }
            }
            for (bi, l) in out {
                c.add_arrow(ai, na + bi, l);
            }
        }
        let red = reduce(&c);
        let m = red.complex.gen_count();
        let row_of = |ci: usize| if ci < na { &a.include[ci] } else { &b.include[ci - na] };
        let mut include = vec![BTreeMap::new(); m];
        for (r, ci, coeff) in red.include.entries() {
            for (&key, cc) in row_of(ci) {
                acc(&mut include[r], key, cc.mul(coeff));
            }
        }
        let mut proj_rows: BTreeMap<usize, Vec<(usize, AlgElem)>> = BTreeMap::new();
        for (ci, r, coeff) in red.project.entries() {
            proj_rows.entry(ci).or_default().push((r, coeff.clone()));
        }
        let mut project: BTreeMap<Key, BTreeMap<usize, AlgElem>> = BTreeMap::new();
        for (list, offset) in [(&a.project, 0), (&b.project, na)] {
            for (&key, entries) in list.iter() {
                for (ci, pc) in entries {
                    if let Some(rows) = proj_rows.get(&(ci + offset)) {
                        for (r, pr) in rows {
                            acc(project.entry(key).or_default(), *r, pr.mul(pc));
                        }
                    }
                }
            }
        }
        Transport {
            complex: red.complex,
            include: include.into_iter().map(|m| m.into_iter().collect()).collect(),
            project: project
                .into_iter()
                .filter(|(_, m)| !m.is_empty())
                .map(|(key, m)| (key, m.into_iter().collect()))
                .collect(),
        }
    }
}

fn acc<K: Ord + Copy>(map: &mut BTreeMap<K, AlgElem>, k: K, v: AlgElem) {
    if v.is_zero() {
        return;
    }
    let e = map.entry(k).or_default();
    *e = e.add(&v);
    if e.is_zero() {
        map.remove(&k);
    }
}

struct Transport {
    complex: TypeD,
    /// Reduced generator to cube chain.
    include: Vec<BTreeMap<Key, AlgElem>>,
    /// Cube generator to reduced chain.
    project: BTreeMap<Key, Vec<(usize, AlgElem)>>,
}

/// The delooped cube as one complex: generators over all `2^n` vertices,
/// differential the sum of all saddle maps.
pub fn cube_complex(d: &TangleDiagram) -> TypeD {
    Builder::new(d).full()
}

/// The delooped cube assembled crossing by crossing, reducing each half
/// before taking the next cone. Returns a reduced complex homotopy
/// equivalent to [`cube_complex`].
pub fn interleaved_cube_complex(d: &TangleDiagram) -> TypeD {
    let b = Builder::new(d);
    b.sub(b.n, 0).complex
}

/// The mapping cone of the central element `H` acting on the cube
/// complex. Its morphism pairings compute reduced Khovanov groups, so
/// this is the complex the classification and pairing layers consume.
pub fn khovanov_complex(d: &TangleDiagram) -> TypeD {
    let x = cube_complex(d);
    cone(&central_action(CentralElem::H, &x), &x).expect("H acts as a chain map")
}
