//! Pointed 4-ended tangle diagrams: a line-based text format,
//! validation through the rotation system, resolutions with circle
//! tracking, connectivity, writhe data, and the twist and pretzel
//! constructions.

use crate::curves::{word_for_slope, Basing, Slope, TwistLetter};
use std::fmt;
use thiserror::Error;

/// Boundary ends, clockwise from the marked corner. The marked end is
/// always NW.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum End {
    NW,
    NE,
    SE,
    SW,
}

impl End {
    pub const ALL: [End; 4] = [End::NW, End::NE, End::SE, End::SW];

    pub fn key(self) -> &'static str {
        match self {
            End::NW => "NW",
            End::NE => "NE",
            End::SE => "SE",
            End::SW => "SW",
        }
    }
}

/// One crossing. `slots` holds the incident arcs counterclockwise from
/// the southwest corner: `[SW, SE, NE, NW]`. `over` is 0 when the
/// strand through SW/NE passes over, 1 when SE/NW does.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Crossing {
    pub name: String,
    pub slots: [usize; 4],
    pub over: u8,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Incidence {
    Boundary(usize),
    Cross(usize, usize),
}

#[derive(Clone, Debug)]
pub struct TangleDiagram {
    arcs: Vec<String>,
    pub crossings: Vec<Crossing>,
    /// Arc at each boundary end, in `End::ALL` order.
    pub ends: [usize; 4],
    /// Arcs marking strands whose default orientation is reversed.
    flips: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("arc {arc} has {count} incidences, need exactly 2")]
    ArcIncidence { arc: String, count: usize },
    #[error("crossing {name}: over arc {arc} {problem}")]
    Over { name: String, arc: String, problem: String },
    #[error("nonplanar diagram: a component has Euler characteristic {chi}, expected 2")]
    Nonplanar { chi: i64 },
    #[error("{0}")]
    Invalid(String),
}

/// How the two open strands pair the boundary ends.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Connectivity {
    /// NW with NE, SW with SE.
    Horizontal,
    /// NW with SW, NE with SE.
    Vertical,
    /// NW with SE, NE with SW.
    Crossed,
}

impl Connectivity {
    pub fn basing(self) -> Basing {
        match self {
            Connectivity::Horizontal => Basing::Horizontal,
            Connectivity::Vertical => Basing::Vertical,
            Connectivity::Crossed => Basing::Diagonal,
        }
    }

    /// The other end of the open strand through end `e` (`End::ALL` index).
    pub fn partner(self, e: usize) -> usize {
        let pairs = match self {
            Connectivity::Horizontal => [1, 0, 3, 2],
            Connectivity::Vertical => [3, 2, 1, 0],
            Connectivity::Crossed => [2, 3, 0, 1],
        };
        pairs[e]
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connectivity::Horizontal => write!(f, "horizontal"),
            Connectivity::Vertical => write!(f, "vertical"),
            Connectivity::Crossed => write!(f, "crossed"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ArcClass {
    /// On the open strand through the marked end.
    Marked,
    /// On the other open strand.
    Open,
    Circle(usize),
}

/// One vertex of the resolution cube: every crossing replaced by the
/// smoothing its bit selects.
#[derive(Clone, Debug)]
pub struct ResolvedDiagram {
    pub vertex: Vec<bool>,
    /// 0 when the open strands pair the ends horizontally, 1 vertically.
    pub eps: u8,
    pub arc_class: Vec<ArcClass>,
    /// Arcs of each circle; ids ordered by smallest member.
    pub circle_arcs: Vec<Vec<usize>>,
}

impl ResolvedDiagram {
    pub fn circles(&self) -> usize {
        self.circle_arcs.len()
    }
}

/// Slot pairs joined by the chosen smoothing. With the SW/NE strand on
/// top its 0-smoothing turns that strand clockwise onto the other one,
/// pairing SW with SE and NE with NW.
pub fn smoothing_slot_pairs(over: u8, bit: bool) -> [(usize, usize); 2] {
    if (over == 0) != bit {
        [(0, 1), (2, 3)]
    } else {
        [(0, 3), (1, 2)]
    }
}

struct Uf(Vec<usize>);

impl Uf {
    fn new(n: usize) -> Uf {
        Uf((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a.max(b)] = a.min(b);
    }
}

impl TangleDiagram {
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc_name(&self, i: usize) -> &str {
        &self.arcs[i]
    }

    pub fn arc_id(&self, name: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a == name)
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    fn push_arc(&mut self, name: String) -> usize {
        debug_assert!(!self.arcs.contains(&name));
        self.arcs.push(name);
        self.arcs.len() - 1
    }

    fn fresh_arc(&mut self, prefix: &str) -> usize {
        let mut k = 0usize;
        loop {
            let name = format!("{prefix}{k}");
            if !self.arcs.contains(&name) {
                return self.push_arc(name);
            }
            k += 1;
        }
    }

    fn incidences(&self) -> Vec<Vec<Incidence>> {
        let mut inc = vec![Vec::new(); self.arcs.len()];
        for (e, &a) in self.ends.iter().enumerate() {
            inc[a].push(Incidence::Boundary(e));
        }
        for (ci, c) in self.crossings.iter().enumerate() {
            for (s, &a) in c.slots.iter().enumerate() {
                inc[a].push(Incidence::Cross(ci, s));
            }
        }
        inc
    }

    pub fn check(&self) -> Result<(), DiagramError> {
        for (a, v) in self.incidences().iter().enumerate() {
            if v.len() != 2 {
                return Err(DiagramError::ArcIncidence {
                    arc: self.arcs[a].clone(),
                    count: v.len(),
                });
            }
        }
        self.planarity()
    }

    /// Euler characteristic of every component of the rotation system
    /// must be 2. Vertices are the crossings plus one boundary vertex;
    /// faces come from tracing corners.
    fn planarity(&self) -> Result<(), DiagramError> {
        // Half-edges in rotation order: boundary ends first, then each
        // crossing's slots; both groups are contiguous.
        let mut half_arc = Vec::new();
        let mut half_vert = Vec::new();
        for &a in &self.ends {
            half_arc.push(a);
            half_vert.push(0usize);
        }
        for (ci, c) in self.crossings.iter().enumerate() {
            for &a in &c.slots {
                half_arc.push(a);
                half_vert.push(1 + ci);
            }
        }
        let h = half_arc.len();
        let sigma = |i: usize| {
            let (start, len) = if i < 4 { (0, 4) } else { (4 + (i - 4) / 4 * 4, 4) };
            start + (i - start + 1) % len
        };
        let mut mate = vec![usize::MAX; h];
        let mut first_of_arc = vec![usize::MAX; self.arcs.len()];
        for i in 0..h {
            let a = half_arc[i];
            if first_of_arc[a] == usize::MAX {
                first_of_arc[a] = i;
            } else {
                mate[i] = first_of_arc[a];
                mate[first_of_arc[a]] = i;
            }
        }

        let mut comp = Uf::new(h);
        for i in 0..h {
            comp.union(i, sigma(i));
            comp.union(i, mate[i]);
        }
        let roots: Vec<usize> = (0..h).map(|i| comp.find(i)).collect();

        // per component: vertex set, half-edge count, face count
        let mut stats: std::collections::BTreeMap<usize, (std::collections::BTreeSet<usize>, usize, i64)> =
            Default::default();
        for i in 0..h {
            let ent = stats.entry(roots[i]).or_default();
            ent.0.insert(half_vert[i]);
            ent.1 += 1;
        }
        let mut face_seen = vec![false; h];
        for i in 0..h {
            if face_seen[i] {
                continue;
            }
            stats.get_mut(&roots[i]).unwrap().2 += 1;
            let mut j = i;
            while !face_seen[j] {
                face_seen[j] = true;
                j = sigma(mate[j]);
            }
        }
        for (verts, halves, faces) in stats.values() {
            let chi = verts.len() as i64 - (halves / 2) as i64 + faces;
            if chi != 2 {
                return Err(DiagramError::Nonplanar { chi });
            }
        }
        Ok(())
    }

    /// Ends pairing by following strands through the crossings.
    pub fn connectivity(&self) -> Connectivity {
        let mut uf = Uf::new(self.arcs.len());
        for c in &self.crossings {
            uf.union(c.slots[0], c.slots[2]);
            uf.union(c.slots[1], c.slots[3]);
        }
        let nw = uf.find(self.ends[0]);
        if nw == uf.find(self.ends[1]) {
            Connectivity::Horizontal
        } else if nw == uf.find(self.ends[3]) {
            Connectivity::Vertical
        } else {
            Connectivity::Crossed
        }
    }

    /// Closed strands that never reach the boundary.
    pub fn closed_components(&self) -> usize {
        let mut uf = Uf::new(self.arcs.len());
        for c in &self.crossings {
            uf.union(c.slots[0], c.slots[2]);
            uf.union(c.slots[1], c.slots[3]);
        }
        let open: Vec<usize> = self.ends.iter().map(|&a| uf.find(a)).collect();
        let mut reps: Vec<usize> = (0..self.arcs.len()).map(|a| uf.find(a)).collect();
        reps.sort_unstable();
        reps.dedup();
        reps.iter().filter(|r| !open.contains(r)).count()
    }

    pub fn resolve(&self, vertex: &[bool]) -> ResolvedDiagram {
        assert_eq!(vertex.len(), self.crossings.len(), "vertex length");
        let mut uf = Uf::new(self.arcs.len());
        for (c, &bit) in self.crossings.iter().zip(vertex) {
            for (s, t) in smoothing_slot_pairs(c.over, bit) {
                uf.union(c.slots[s], c.slots[t]);
            }
        }
        let nw = uf.find(self.ends[0]);
        let ne = uf.find(self.ends[1]);
        let se = uf.find(self.ends[2]);
        let sw = uf.find(self.ends[3]);
        let eps = if nw == ne && sw == se {
            0
        } else if nw == sw && ne == se {
            1
        } else {
            unreachable!("open strands of a planar resolution pair adjacently")
        };

        let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for a in 0..self.arcs.len() {
            members.entry(uf.find(a)).or_default().push(a);
        }
        let marked = nw;
        let other = if eps == 0 { sw } else { ne };
        let mut arc_class = vec![ArcClass::Open; self.arcs.len()];
        let mut circle_arcs = Vec::new();
        for (rep, arcs) in members {
            let class = if rep == marked {
                ArcClass::Marked
            } else if rep == other {
                ArcClass::Open
            } else {
                circle_arcs.push(arcs.clone());
                ArcClass::Circle(circle_arcs.len() - 1)
            };
            for a in arcs {
                arc_class[a] = class;
            }
        }
        ResolvedDiagram { vertex: vertex.to_vec(), eps, arc_class, circle_arcs }
    }

    /// Strands as runs of arcs, each with `true` when the arc runs from
    /// its first incidence to its second. Open strands start from the
    /// boundary in end order; closed ones from their smallest arc.
    fn strands(&self) -> Vec<Vec<(usize, bool)>> {
        let inc = self.incidences();
        let mut seen = vec![false; self.arcs.len()];
        let mut out = Vec::new();
        let walk = |start: usize, at: Incidence, seen: &mut Vec<bool>| {
            let mut strand = Vec::new();
            let (mut arc, mut at) = (start, at);
            while !seen[arc] {
                seen[arc] = true;
                let fwd = inc[arc][0] == at;
                strand.push((arc, fwd));
                match if fwd { inc[arc][1] } else { inc[arc][0] } {
                    Incidence::Boundary(_) => break,
                    Incidence::Cross(ci, s) => {
                        let exit = (s + 2) % 4;
                        arc = self.crossings[ci].slots[exit];
                        at = Incidence::Cross(ci, exit);
                    }
                }
            }
            strand
        };
        for e in 0..4 {
            let a = self.ends[e];
            if !seen[a] {
                out.push(walk(a, Incidence::Boundary(e), &mut seen));
            }
        }
        for a in 0..self.arcs.len() {
            if !seen[a] {
                out.push(walk(a, inc[a][0], &mut seen));
            }
        }
        out
    }

    fn directions(&self) -> Vec<bool> {
        let mut dir = vec![true; self.arcs.len()];
        for strand in self.strands() {
            let flip = strand.iter().any(|(a, _)| self.flips.contains(a));
            for &(a, f) in &strand {
                dir[a] = f != flip;
            }
        }
        dir
    }

    /// +1 where turning the over strand's direction counterclockwise by
    /// a quarter turn gives the under strand's direction.
    pub fn crossing_signs(&self) -> Vec<i8> {
        let inc = self.incidences();
        let dir = self.directions();
        self.crossings
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let entry = |p: usize| {
                    [p, (p + 2) % 4]
                        .into_iter()
                        .find(|&s| {
                            let a = c.slots[s];
                            let head = if dir[a] { inc[a][1] } else { inc[a][0] };
                            head == Incidence::Cross(ci, s)
                        })
                        .expect("each passage has one inbound slot")
                };
                let over_in = entry(c.over as usize);
                let under_in = entry((c.over as usize + 1) % 4);
                if under_in == (over_in + 1) % 4 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    pub fn writhe_data(&self) -> (usize, usize) {
        let signs = self.crossing_signs();
        (
            signs.iter().filter(|&&s| s > 0).count(),
            signs.iter().filter(|&&s| s < 0).count(),
        )
    }

    /// For each boundary end, whether the strand is oriented out of the
    /// diagram there.
    pub fn end_outward(&self) -> [bool; 4] {
        let inc = self.incidences();
        let dir = self.directions();
        let mut out = [false; 4];
        for (e, &a) in self.ends.iter().enumerate() {
            let head = if dir[a] { inc[a][1] } else { inc[a][0] };
            out[e] = head == Incidence::Boundary(e);
        }
        out
    }

    /// Toggles the orientation of the open strand through `end`.
    pub fn reverse_strand_at(&self, end: End) -> TangleDiagram {
        let e = End::ALL.iter().position(|&x| x == end).unwrap();
        let strand = self
            .strands()
            .into_iter()
            .find(|s| s.iter().any(|&(a, _)| a == self.ends[e]))
            .expect("every end lies on a strand");
        let members: Vec<usize> = strand.iter().map(|&(a, _)| a).collect();
        let mut out = self.clone();
        if out.flips.iter().any(|a| members.contains(a)) {
            out.flips.retain(|a| !members.contains(a));
        } else {
            out.flips.push(self.ends[e]);
        }
        out
    }

    fn over_token(&self, c: &Crossing) -> String {
        for s in [c.over as usize, c.over as usize + 2] {
            let a = c.slots[s];
            let parities: Vec<u8> =
                (0..4).filter(|&t| c.slots[t] == a).map(|t| (t % 2) as u8).collect();
            if parities.iter().all(|&p| p == c.over) {
                return self.arcs[a].clone();
            }
        }
        format!("#{}", c.over)
    }
}

impl fmt::Display for TangleDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ends")?;
        for (e, &a) in End::ALL.iter().zip(&self.ends) {
            write!(f, " {}={}", e.key(), self.arcs[a])?;
        }
        writeln!(f)?;
        for c in &self.crossings {
            writeln!(
                f,
                "x {}: ({}, {}, {}, {}) over={}",
                c.name,
                self.arcs[c.slots[0]],
                self.arcs[c.slots[1]],
                self.arcs[c.slots[2]],
                self.arcs[c.slots[3]],
                self.over_token(c)
            )?;
        }
        for &a in &self.flips {
            writeln!(f, "orient {} <-", self.arcs[a])?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Constructions

/// The crossingless tangle whose marked strand joins NW to NE.
pub fn horizontal_tangle() -> TangleDiagram {
    let mut d = TangleDiagram { arcs: Vec::new(), crossings: Vec::new(), ends: [0; 4], flips: Vec::new() };
    let top = d.push_arc("a0".into());
    let bot = d.push_arc("a1".into());
    d.ends = [top, top, bot, bot];
    d
}

/// The crossingless tangle whose marked strand joins NW to SW.
pub fn vertical_tangle() -> TangleDiagram {
    let mut d = TangleDiagram { arcs: Vec::new(), crossings: Vec::new(), ends: [0; 4], flips: Vec::new() };
    let west = d.push_arc("a0".into());
    let east = d.push_arc("a1".into());
    d.ends = [west, east, east, west];
    d
}

/// Over-slot parities of the positive east and south half twists.
/// Pinned by the requirement that the twisted diagrams track the same
/// slopes as the twist bimodules.
const EAST_OVER: u8 = 0;
const SOUTH_OVER: u8 = 0;

/// Adds one crossing: east twists braid the NE/SE ends, south twists
/// the SW/SE ends. The letter fixes which strand passes over.
pub fn twisted(d: &TangleDiagram, letter: TwistLetter) -> TangleDiagram {
    let mut out = d.clone();
    let name = format!("x{}", out.crossings.len() + 1);
    match letter {
        TwistLetter::T1 | TwistLetter::T1Inv => {
            let (old_ne, old_se) = (out.ends[1], out.ends[2]);
            let ne = out.fresh_arc("e");
            let se = out.fresh_arc("e");
            let over = if letter == TwistLetter::T1 { EAST_OVER } else { 1 - EAST_OVER };
            out.crossings.push(Crossing { name, slots: [old_se, se, ne, old_ne], over });
            out.ends[1] = ne;
            out.ends[2] = se;
        }
        TwistLetter::T2 | TwistLetter::T2Inv => {
            let (old_se, old_sw) = (out.ends[2], out.ends[3]);
            let sw = out.fresh_arc("s");
            let se = out.fresh_arc("s");
            let over = if letter == TwistLetter::T2 { SOUTH_OVER } else { 1 - SOUTH_OVER };
            out.crossings.push(Crossing { name, slots: [sw, se, old_se, old_sw], over });
            out.ends[3] = sw;
            out.ends[2] = se;
        }
    }
    out
}

/// The twist diagram for a slope, built by continued fractions from the
/// horizontal tangle. The vertical slope gets its crossingless form.
pub fn rational_tangle(s: Slope) -> TangleDiagram {
    if s.is_infinite() {
        return vertical_tangle();
    }
    word_for_slope(s).iter().fold(horizontal_tangle(), |d, &l| twisted(&d, l))
}

/// Two vertical twist bands side by side, k1 crossings in the west band
/// and k2 in the east, joined by arches; ends at the outer corners.
/// Positive counts put the SE/NW strand of each band's crossings on top.
pub fn pretzel_tangle(k1: i64, k2: i64) -> Result<TangleDiagram, DiagramError> {
    if k1 == 0 || k2 == 0 {
        return Err(DiagramError::Invalid("pretzel bands need at least one crossing".into()));
    }
    let (m, n) = (k1.unsigned_abs() as usize, k2.unsigned_abs() as usize);
    let mut d = TangleDiagram { arcs: Vec::new(), crossings: Vec::new(), ends: [0; 4], flips: Vec::new() };
    let u: Vec<usize> = (0..=m).map(|i| d.push_arc(format!("u{i}"))).collect();
    let e: Vec<usize> = (0..=m).map(|i| d.push_arc(format!("e{i}"))).collect();
    let w: Vec<usize> = (0..=n).map(|j| d.push_arc(format!("w{j}"))).collect();
    // the west band's two chains trade slots at every crossing, so its
    // terminal slots see different chains for odd and even lengths
    let (bottom_arch, sw_end) = if m % 2 == 0 { (e[m], u[m]) } else { (u[m], e[m]) };
    let y: Vec<usize> = (0..=n)
        .map(|j| {
            if j == 0 {
                bottom_arch
            } else if j == n {
                e[0]
            } else {
                d.push_arc(format!("y{j}"))
            }
        })
        .collect();
    let lover = if k1 > 0 { 1 } else { 0 };
    for i in 1..=m {
        // alternate mirrored crossings down the west band
        let slots = if i % 2 == 1 {
            [u[i], e[i - 1], u[i - 1], e[i]]
        } else {
            [e[i], u[i - 1], e[i - 1], u[i]]
        };
        d.crossings.push(Crossing { name: format!("l{i}"), slots, over: lover });
    }
    let rover = if k2 > 0 { 1 } else { 0 };
    for j in 1..=n {
        d.crossings.push(Crossing {
            name: format!("r{j}"),
            slots: [w[j - 1], w[j], y[j], y[j - 1]],
            over: rover,
        });
    }
    d.ends = [u[0], w[n], w[0], sw_end];
    d.check()?;
    Ok(d)
}

// ---------------------------------------------------------------------------
// Parsing

pub fn parse(text: &str) -> Result<TangleDiagram, DiagramError> {
    let err = |line: usize, msg: &str| DiagramError::Parse { line, msg: msg.to_string() };
    let mut ends: Option<(usize, [String; 4])> = None;
    let mut xlines: Vec<(usize, String, [String; 4], String)> = Vec::new();
    let mut orients: Vec<(usize, String)> = Vec::new();
    let mut shorthand: Option<(usize, TangleDiagram)> = None;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next().unwrap() {
            "ends" => {
                let mut vals: [Option<String>; 4] = Default::default();
                for w in words {
                    let (key, val) = w
                        .split_once('=')
                        .ok_or_else(|| err(ln, "expected KEY=arc"))?;
                    let slot = End::ALL
                        .iter()
                        .position(|e| e.key() == key)
                        .ok_or_else(|| err(ln, "end keys are NW, NE, SE, SW"))?;
                    if vals[slot].replace(val.to_string()).is_some() {
                        return Err(err(ln, "duplicate end"));
                    }
                }
                let all = vals
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(ln, "all four ends are required"))?;
                if ends.replace((ln, all.try_into().unwrap())).is_some() {
                    return Err(err(ln, "duplicate ends line"));
                }
            }
            "x" => {
                let rest = line[1..].trim();
                let (name, rest) = rest
                    .split_once(':')
                    .ok_or_else(|| err(ln, "expected x NAME: (a, b, c, d) over=arc"))?;
                let rest = rest.trim();
                let open = rest.find('(').ok_or_else(|| err(ln, "missing ("))?;
                let close = rest.find(')').ok_or_else(|| err(ln, "missing )"))?;
                let slots: Vec<String> = rest[open + 1..close]
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .collect();
                if slots.len() != 4 || slots.iter().any(|s| s.is_empty()) {
                    return Err(err(ln, "a crossing lists four arcs, counterclockwise from SW"));
                }
                let over = rest[close + 1..]
                    .trim()
                    .strip_prefix("over=")
                    .ok_or_else(|| err(ln, "missing over="))?
                    .trim()
                    .to_string();
                xlines.push((
                    ln,
                    name.trim().to_string(),
                    slots.try_into().unwrap(),
                    over,
                ));
            }
            "orient" => {
                let arc = words.next().ok_or_else(|| err(ln, "orient ARC -> or <-"))?;
                match words.next() {
                    Some("<-") => orients.push((ln, arc.to_string())),
                    Some("->") => {}
                    _ => return Err(err(ln, "orient ARC -> or <-")),
                }
            }
            "rational" => {
                let s: Slope = words
                    .next()
                    .ok_or_else(|| err(ln, "rational P/Q"))?
                    .parse()
                    .map_err(|e: String| err(ln, &e))?;
                if shorthand.replace((ln, rational_tangle(s))).is_some() {
                    return Err(err(ln, "duplicate shorthand"));
                }
            }
            "pretzel" => {
                let ks: Vec<i64> = words
                    .map(|w| w.parse::<i64>().map_err(|e| err(ln, &e.to_string())))
                    .collect::<Result<_, _>>()?;
                let [k1, k2] = ks[..] else {
                    return Err(err(ln, "pretzel K1 K2"));
                };
                if shorthand.replace((ln, pretzel_tangle(k1, k2)?)).is_some() {
                    return Err(err(ln, "duplicate shorthand"));
                }
            }
            other => return Err(err(ln, &format!("unknown declaration {other}"))),
        }
    }

    if let Some((ln, d)) = shorthand {
        if ends.is_some() || !xlines.is_empty() || !orients.is_empty() {
            return Err(err(ln, "a shorthand must be the only declaration"));
        }
        d.check()?;
        return Ok(d);
    }
    let (_, end_names) = ends.ok_or_else(|| err(0, "missing ends line"))?;

    let mut d =
        TangleDiagram { arcs: Vec::new(), crossings: Vec::new(), ends: [0; 4], flips: Vec::new() };
    let intern = |d: &mut TangleDiagram, name: &str| -> usize {
        d.arc_id(name).unwrap_or_else(|| d.push_arc(name.to_string()))
    };
    for (i, name) in end_names.iter().enumerate() {
        d.ends[i] = intern(&mut d, name);
    }
    for (ln, name, slot_names, over_name) in xlines {
        let slots: [usize; 4] =
            std::array::from_fn(|i| intern(&mut d, &slot_names[i]));
        let over = if let Some(num) = over_name.strip_prefix('#') {
            let s: usize = num
                .parse()
                .map_err(|_| err(ln, "over=#SLOT with slot in 0..4"))?;
            if s >= 4 {
                return Err(err(ln, "over=#SLOT with slot in 0..4"));
            }
            (s % 2) as u8
        } else {
            let arc = d.arc_id(&over_name).ok_or_else(|| DiagramError::Over {
                name: name.clone(),
                arc: over_name.clone(),
                problem: "is not an arc of this diagram".into(),
            })?;
            let parities: Vec<u8> = (0..4)
                .filter(|&s| slots[s] == arc)
                .map(|s| (s % 2) as u8)
                .collect();
            match parities[..] {
                [] => {
                    return Err(DiagramError::Over {
                        name,
                        arc: over_name,
                        problem: "does not meet this crossing".into(),
                    })
                }
                [p] => p,
                [p, q] if p == q => p,
                _ => {
                    return Err(DiagramError::Over {
                        name,
                        arc: over_name,
                        problem: "meets both strands; use over=#SLOT".into(),
                    })
                }
            }
        };
        d.crossings.push(Crossing { name, slots, over });
    }
    for (ln, arc) in orients {
        let a = d
            .arc_id(&arc)
            .ok_or_else(|| err(ln, &format!("unknown arc {arc}")))?;
        if !d.flips.contains(&a) {
            d.flips.push(a);
        }
    }
    d.check()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_tangle() -> TangleDiagram {
        parse(
            "ends NW=a3 NE=a2 SE=a1 SW=a0\n\
             x c: (a0, a1, a2, a3) over=a0\n",
        )
        .unwrap()
    }

    #[test]
    fn trivial_tangles_resolve() {
        let q0 = horizontal_tangle();
        q0.check().unwrap();
        let r = q0.resolve(&[]);
        assert_eq!(r.eps, 0);
        assert_eq!(r.circles(), 0);
        assert_eq!(q0.connectivity(), Connectivity::Horizontal);
        assert_eq!(q0.writhe_data(), (0, 0));

        let qi = vertical_tangle();
        assert_eq!(qi.resolve(&[]).eps, 1);
        assert_eq!(qi.connectivity(), Connectivity::Vertical);
    }

    #[test]
    fn one_crossing_tangle() {
        let x = x_tangle();
        assert_eq!(x.connectivity(), Connectivity::Crossed);
        let r0 = x.resolve(&[false]);
        let r1 = x.resolve(&[true]);
        assert_eq!((r0.circles(), r0.eps), (0, 0));
        assert_eq!((r1.circles(), r1.eps), (0, 1));
        assert_eq!(x.writhe_data(), (1, 0));
    }

    #[test]
    fn orient_flip_negates_a_crossing() {
        let flipped = parse(
            "ends NW=a3 NE=a2 SE=a1 SW=a0\n\
             x c: (a0, a1, a2, a3) over=a0\n\
             orient a2 <-\n",
        )
        .unwrap();
        assert_eq!(flipped.writhe_data(), (0, 1));
    }

    #[test]
    fn display_round_trips() {
        for d in [x_tangle(), pretzel_tangle(2, -3).unwrap(), rational_tangle(Slope::new(2, 3))] {
            let text = d.to_string();
            let back = parse(&text).unwrap();
            assert_eq!(back.to_string(), text);
            assert_eq!(back.crossing_count(), d.crossing_count());
        }
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse("ends NW=a NE=a SE=a SW=b\n"),
            Err(DiagramError::ArcIncidence { .. })
        ));
        assert!(matches!(
            parse("ends NW=a3 NE=a2 SE=a1 SW=a0\nx c: (a0, a1, a2, a3) over=b\n"),
            Err(DiagramError::Over { .. })
        ));
        // swapping two slots twists the rotation system off the plane
        assert!(matches!(
            parse("ends NW=a3 NE=a2 SE=a1 SW=a0\nx c: (a0, a1, a3, a2) over=a0\n"),
            Err(DiagramError::Nonplanar { .. })
        ));
        assert!(parse("rational 1/2\npretzel 2 -3\n").is_err());
    }

    #[test]
    fn kinked_twist_births_a_circle() {
        let d = twisted(&vertical_tangle(), TwistLetter::T1);
        d.check().unwrap();
        assert_eq!(d.crossing_count(), 1);
        let counts: Vec<usize> = [false, true].iter().map(|&b| d.resolve(&[b]).circles()).collect();
        assert_eq!(counts.iter().sum::<usize>(), 1, "one smoothing closes a circle");
        let text = d.to_string();
        assert_eq!(parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn rational_tangles_have_continued_fraction_length() {
        for (s, n) in [
            (Slope::new(0, 1), 0),
            (Slope::INFINITY, 0),
            (Slope::integer(2), 2),
            (Slope::new(1, 2), 2),
            (Slope::new(2, 3), 3),
            (Slope::new(-1, 2), 2),
        ] {
            let d = rational_tangle(s);
            d.check().unwrap();
            assert_eq!(d.crossing_count(), n, "slope {s}");
        }
    }

    #[test]
    fn rational_connectivity_matches_slope_parity() {
        use crate::curves::basing_from_slope;
        for s in [
            Slope::new(0, 1),
            Slope::INFINITY,
            Slope::integer(1),
            Slope::integer(-1),
            Slope::integer(2),
            Slope::new(1, 2),
            Slope::new(-1, 2),
            Slope::new(2, 3),
        ] {
            let d = rational_tangle(s);
            assert_eq!(d.connectivity().basing(), basing_from_slope(s), "slope {s}");
        }
    }

    #[test]
    fn pretzel_matches_the_band_picture() {
        let p = pretzel_tangle(2, -3).unwrap();
        assert_eq!(p.crossing_count(), 5);
        assert_eq!(p.arc_count(), 12);
        assert_eq!(p.connectivity(), Connectivity::Vertical);
        assert_eq!(p.closed_components(), 0);
        let (np, nn) = p.writhe_data();
        assert_eq!(np + nn, 5);

        let signs = p.crossing_signs();
        assert!(signs[..2].iter().all(|&s| s == signs[0]), "west band is one twist region");
        assert!(signs[2..].iter().all(|&s| s == signs[2]), "east band is one twist region");

        for (a, b) in [(3, -2), (2, -5), (1, 1), (-1, 3)] {
            let q = pretzel_tangle(a, b).unwrap();
            assert_eq!(q.crossing_count(), (a.abs() + b.abs()) as usize);
        }
    }

    fn circle_count_by_traversal(d: &TangleDiagram, v: &[bool]) -> usize {
        // follow each loop arc by arc through the chosen smoothings
        let mut pair: Vec<Vec<usize>> = vec![Vec::new(); d.arc_count()];
        for (c, &bit) in d.crossings.iter().zip(v) {
            for (s, t) in smoothing_slot_pairs(c.over, bit) {
                pair[c.slots[s]].push(c.slots[t]);
                pair[c.slots[t]].push(c.slots[s]);
            }
        }
        let open: Vec<usize> = d.ends.to_vec();
        let mut seen = vec![false; d.arc_count()];
        for &a in &open {
            let mut stack = vec![a];
            while let Some(x) = stack.pop() {
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(pair[x].iter().copied());
                }
            }
        }
        let mut circles = 0;
        for a in 0..d.arc_count() {
            if seen[a] {
                continue;
            }
            circles += 1;
            let mut stack = vec![a];
            while let Some(x) = stack.pop() {
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(pair[x].iter().copied());
                }
            }
        }
        circles
    }

    #[test]
    fn single_bit_flips_are_local() {
        let p = pretzel_tangle(2, -3).unwrap();
        let n = p.crossing_count();
        for code in 0..1u32 << n {
            let v: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
            let r = p.resolve(&v);
            assert_eq!(r.circles(), circle_count_by_traversal(&p, &v));
            for i in 0..n {
                let mut w = v.clone();
                w[i] = !w[i];
                let r2 = p.resolve(&w);
                let dc = r2.circles() as i64 - r.circles() as i64;
                if r.eps != r2.eps {
                    assert_eq!(dc, 0, "saddles between the open strands keep circles");
                } else {
                    assert_eq!(dc.abs(), 1, "a circle merges or splits");
                }
            }
        }
    }
}
