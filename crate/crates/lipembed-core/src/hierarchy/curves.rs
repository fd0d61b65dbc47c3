//! Discrete boundary curves.
//!
//! Coordinates are level-(j-1) lattice points; level-j vertex `v` sits at `(v.x r, v.y r)`.
//! A curve is fixed by a corner choice `(l, s)` at every vertex and a track index at
//! every edge. With `s = 1` the corner is the straight cross; with `s = 2` the crossing
//! moves to `v + (q, q)` and each arm jogs onto the cell line at the boundary of the
//! corner square `[-a_l, a_l]^2`. An edge with track `t` runs parallel to its cell line at
//! offset `t`, jogging back at both corner squares.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::Point;
use crate::params::LevelGeometry;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orient {
    /// Between `cell` and `cell + (0, 1)`; a horizontal piece of cell line.
    H,
    /// Between `cell` and `cell + (1, 0)`.
    V,
}

/// One side of a level-j cell, named by the cell below / left of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bnd {
    pub cell: Point,
    pub orient: Orient,
}

impl Bnd {
    /// The boundary shared by Euclidean neighbours `u` and `v`.
    pub fn between(u: Point, v: Point) -> Bnd {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        match (b.x - a.x, b.y - a.y) {
            (0, 1) => Bnd { cell: a, orient: Orient::H },
            (1, 0) => Bnd { cell: a, orient: Orient::V },
            _ => panic!("{u} and {v} are not Euclidean neighbours"),
        }
    }
    pub fn cells(self) -> (Point, Point) {
        match self.orient {
            Orient::H => (self.cell, self.cell.add(Point::new(0, 1))),
            Orient::V => (self.cell, self.cell.add(Point::new(1, 0))),
        }
    }
    /// End vertices, lower coordinate first.
    pub fn ends(self) -> (Point, Point) {
        let c = self.cell;
        match self.orient {
            Orient::H => (Point::new(c.x, c.y + 1), Point::new(c.x + 1, c.y + 1)),
            Orient::V => (Point::new(c.x + 1, c.y), Point::new(c.x + 1, c.y + 1)),
        }
    }
}

/// The four boundaries meeting at vertex `v`: east, north, west, south arms.
pub fn arms(v: Point) -> [Bnd; 4] {
    [
        Bnd { cell: Point::new(v.x, v.y - 1), orient: Orient::H },
        Bnd { cell: Point::new(v.x - 1, v.y), orient: Orient::V },
        Bnd { cell: Point::new(v.x - 1, v.y - 1), orient: Orient::H },
        Bnd { cell: Point::new(v.x - 1, v.y - 1), orient: Orient::V },
    ]
}

/// Axis-aligned segment between lattice points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Seg {
    pub a: Point,
    pub b: Point,
}

impl Seg {
    fn new(a: Point, b: Point) -> Seg {
        debug_assert!(a.x == b.x || a.y == b.y);
        Seg { a, b }
    }
    fn lo_hi(self) -> (Point, Point) {
        (Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)), Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)))
    }
    /// Whole cells strictly between the segment and unit cell `c` (L-infinity).
    pub fn gap(self, c: Point) -> i64 {
        let (lo, hi) = self.lo_hi();
        let dx = (lo.x - (c.x + 1)).max(c.x - hi.x).max(0);
        let dy = (lo.y - (c.y + 1)).max(c.y - hi.y).max(0);
        dx.max(dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CornerChoice {
    /// Corner square index, 1-based.
    pub l: u8,
    /// 1 straight, 2 shifted.
    pub s: u8,
}

impl CornerChoice {
    pub const STRAIGHT: CornerChoice = CornerChoice { l: 1, s: 1 };
}

fn radius(g: &LevelGeometry, c: CornerChoice) -> i64 {
    g.corner_radii[c.l as usize - 1]
}

/// Curve pieces inside the corner square of `v` for the arms flagged in `on` (E, N, W, S).
pub fn corner_segments(g: &LevelGeometry, v: Point, on: [bool; 4], c: CornerChoice) -> Vec<Seg> {
    let o = Point::new(v.x * g.ratio, v.y * g.ratio);
    let a = radius(g, c);
    let q = g.corner_shift;
    let p = |x: i64, y: i64| o.add(Point::new(x, y));
    let mut out = Vec::new();
    // (tip of the arm on the cell line, jog target, crossing)
    let shapes: [[Point; 3]; 4] = if c.s == 1 {
        [[p(a, 0), p(a, 0), p(0, 0)], [p(0, a), p(0, a), p(0, 0)], [p(-a, 0), p(-a, 0), p(0, 0)], [p(0, -a), p(0, -a), p(0, 0)]]
    } else {
        [[p(a, 0), p(a, q), p(q, q)], [p(0, a), p(q, a), p(q, q)], [p(-a, 0), p(-a, q), p(q, q)], [p(0, -a), p(q, -a), p(q, q)]]
    };
    for (k, s) in shapes.iter().enumerate() {
        if !on[k] {
            continue;
        }
        if s[0] != s[1] {
            out.push(Seg::new(s[0], s[1]));
        }
        out.push(Seg::new(s[1], s[2]));
    }
    out
}

/// Curve pieces of boundary `b` between the corner squares of radii `a0` (start) and `a1` (end).
pub fn edge_segments(g: &LevelGeometry, b: Bnd, a0: i64, a1: i64, s_e: u8) -> Vec<Seg> {
    let r = g.ratio;
    let t = g.tracks[s_e as usize - 1];
    let (v0, v1) = b.ends();
    let (start, end, shift) = match b.orient {
        Orient::H => (Point::new(v0.x * r + a0, v0.y * r), Point::new(v1.x * r - a1, v1.y * r), Point::new(0, t)),
        Orient::V => (Point::new(v0.x * r, v0.y * r + a0), Point::new(v1.x * r, v1.y * r - a1), Point::new(t, 0)),
    };
    if t == 0 {
        return vec![Seg::new(start, end)];
    }
    let (s2, e2) = (start.add(shift), end.add(shift));
    vec![Seg::new(start, s2), Seg::new(s2, e2), Seg::new(e2, end)]
}

/// True iff no cell with `bad(cell)` lies within `clearance` cells of any segment.
pub fn clears(segs: &[Seg], clearance: i64, bad: &dyn Fn(Point) -> bool) -> bool {
    for s in segs {
        let (lo, hi) = s.lo_hi();
        for y in lo.y - clearance..hi.y + clearance {
            for x in lo.x - clearance..hi.x + clearance {
                let c = Point::new(x, y);
                if s.gap(c) < clearance && bad(c) {
                    return false;
                }
            }
        }
    }
    true
}

/// All corner choices at `v` whose active arms clear bad cells, ordered by `(l, s)`.
pub fn valid_corner_choices(g: &LevelGeometry, v: Point, on: [bool; 4], bad: &dyn Fn(Point) -> bool) -> Vec<CornerChoice> {
    let mut out = Vec::new();
    for l in 1..=g.corner_radii.len() as u8 {
        for s in 1..=2u8 {
            let c = CornerChoice { l, s };
            if clears(&corner_segments(g, v, on, c), g.clearance, bad) {
                out.push(c);
            }
        }
    }
    out
}

/// All track indices for `b` that clear bad cells, ascending.
pub fn valid_edge_choices(g: &LevelGeometry, b: Bnd, a0: i64, a1: i64, bad: &dyn Fn(Point) -> bool) -> Vec<u8> {
    (1..=g.tracks.len() as u8).filter(|&s| clears(&edge_segments(g, b, a0, a1, s), g.clearance, bad)).collect()
}

/// Mass moved off the preferred choice when curves are chosen at level `j + 1`.
pub fn epsilon(j: u32) -> f64 {
    libm::pow(10.0, -((j + 10) as f64))
}

/// Lowest admissible probability of any single valid choice.
pub fn probability_floor(k0: u64, j: u32) -> f64 {
    libm::pow(8.0 * k0 as f64, -4.0 * (k0 * k0) as f64) * libm::pow(100.0, -((j + 10) as f64))
}

/// Probabilities over `n` valid choices: `1 - eps` on `preferred`, the rest shared
/// evenly; uniform when there is no preferred choice.
pub fn choice_probabilities(n: usize, preferred: Option<usize>, eps: f64) -> Vec<f64> {
    match preferred {
        _ if n == 0 => Vec::new(),
        Some(p) if n == 1 => {
            debug_assert_eq!(p, 0);
            vec![1.0]
        }
        Some(p) => (0..n).map(|i| if i == p { 1.0 - eps } else { eps / (n - 1) as f64 }).collect(),
        None => vec![1.0 / n as f64; n],
    }
}

/// Draws an index from [`choice_probabilities`].
pub fn pick(n: usize, preferred: Option<usize>, eps: f64, r: &mut impl rand_core::RngCore) -> usize {
    assert!(n > 0);
    match preferred {
        Some(p) if n == 1 || rng::unit_f64(r) < 1.0 - eps => p,
        Some(p) => {
            let k = rng::below(r, (n - 1) as u64) as usize;
            if k < p {
                k
            } else {
                k + 1
            }
        }
        None => rng::below(r, n as u64) as usize,
    }
}

/// Draws the corner choice at `v` among `valid` (nonempty, sorted).
pub fn choose_corner(valid: &[CornerChoice], seed: u64, level: u32, v: Point) -> CornerChoice {
    let pref = valid.iter().position(|c| c.s == 1);
    let mut r = rng::keyed(seed, rng::TAG_CURVE_VERTEX, 0, level as u8, rng::pack(v.x, v.y));
    valid[pick(valid.len(), pref, epsilon(level - 1), &mut r)]
}

/// Draws the track index of `b` among `valid` (nonempty, ascending).
pub fn choose_edge(valid: &[u8], seed: u64, level: u32, b: Bnd) -> u8 {
    let pref = valid.iter().position(|&s| s == 1);
    let sub = match b.orient {
        Orient::H => 0,
        Orient::V => 1,
    };
    let mut r = rng::keyed(seed, rng::TAG_CURVE_EDGE, sub, level as u8, rng::pack(b.cell.x, b.cell.y));
    valid[pick(valid.len(), pref, epsilon(level - 1), &mut r)]
}

/// Chosen corners and tracks over some set of vertices and boundaries; anything
/// not listed is straight.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CurveChoices {
    pub corners: BTreeMap<Point, CornerChoice>,
    pub edges: BTreeMap<Bnd, u8>,
}

impl CurveChoices {
    pub fn corner(&self, v: Point) -> CornerChoice {
        self.corners.get(&v).copied().unwrap_or(CornerChoice::STRAIGHT)
    }
    pub fn edge(&self, b: Bnd) -> u8 {
        self.edges.get(&b).copied().unwrap_or(1)
    }

    /// The level-j cell owning level-(j-1) cell `c`.
    pub fn owner(&self, g: &LevelGeometry, c: Point) -> Point {
        let r = g.ratio;
        let base = Point::new(c.x.div_euclid(r), c.y.div_euclid(r));
        let v = Point::new((c.x + r / 2).div_euclid(r), (c.y + r / 2).div_euclid(r));
        let rel = Point::new(c.x - v.x * r, c.y - v.y * r);
        let cv = self.corner(v);
        let a = radius(g, cv);
        if (-a..a).contains(&rel.x) && (-a..a).contains(&rel.y) {
            if cv.s == 2 {
                let q = g.corner_shift;
                return Point::new(v.x - 1 + i64::from(rel.x >= q), v.y - 1 + i64::from(rel.y >= q));
            }
            return base;
        }
        // Horizontal cell line y = v.y r, between vertices (base.x, v.y) and (base.x + 1, v.y).
        let bh = Bnd { cell: Point::new(base.x, v.y - 1), orient: Orient::H };
        let (h0, h1) = bh.ends();
        if c.x >= base.x * r + radius(g, self.corner(h0)) && c.x < (base.x + 1) * r - radius(g, self.corner(h1)) {
            let t = g.tracks[self.edge(bh) as usize - 1];
            if t > 0 && (0..t).contains(&rel.y) {
                return Point::new(base.x, v.y - 1);
            }
            if t < 0 && (t..0).contains(&rel.y) {
                return Point::new(base.x, v.y);
            }
        }
        let bv = Bnd { cell: Point::new(v.x - 1, base.y), orient: Orient::V };
        let (w0, w1) = bv.ends();
        if c.y >= base.y * r + radius(g, self.corner(w0)) && c.y < (base.y + 1) * r - radius(g, self.corner(w1)) {
            let t = g.tracks[self.edge(bv) as usize - 1];
            if t > 0 && (0..t).contains(&rel.x) {
                return Point::new(v.x - 1, base.y);
            }
            if t < 0 && (t..0).contains(&rel.x) {
                return Point::new(v.x, base.y);
            }
        }
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParameterSet;

    fn geom() -> LevelGeometry {
        ParameterSet::toy().level_geometry(1).unwrap()
    }

    #[test]
    fn arms_touch_their_vertex() {
        let v = Point::new(3, -2);
        for b in arms(v) {
            let (a, c) = b.ends();
            assert!(a == v || c == v);
        }
    }

    #[test]
    fn straight_choices_leave_ownership_alone() {
        let g = geom();
        let ch = CurveChoices::default();
        for c in crate::lattice::Rect::new(-40, -40, 80, 80).points() {
            assert_eq!(ch.owner(&g, c), Point::new(c.x.div_euclid(36), c.y.div_euclid(36)));
        }
    }

    #[test]
    fn shifted_corner_moves_only_its_square() {
        let g = geom();
        let mut ch = CurveChoices::default();
        ch.corners.insert(Point::new(1, 1), CornerChoice { l: 1, s: 2 });
        let mut moved = 0;
        for c in crate::lattice::Rect::new(0, 0, 72, 72).points() {
            let base = Point::new(c.x / 36, c.y / 36);
            if ch.owner(&g, c) != base {
                moved += 1;
                assert!((c.x - 36).abs() <= 4 && (c.y - 36).abs() <= 4);
            }
        }
        // q = 3, a = 4: cells with 0 <= rx < 3 or 0 <= ry < 3 inside [-4, 4)^2.
        assert_eq!(moved, 3 * 8 + 8 * 3 - 3 * 3);
    }

    #[test]
    fn segment_gap() {
        let s = Seg::new(Point::new(0, 0), Point::new(5, 0));
        assert_eq!(s.gap(Point::new(2, 0)), 0);
        assert_eq!(s.gap(Point::new(2, -1)), 0);
        assert_eq!(s.gap(Point::new(2, 2)), 2);
        assert_eq!(s.gap(Point::new(8, 0)), 3);
    }

    #[test]
    fn centre_obstruction_leaves_only_shifted_corners() {
        let g = geom();
        let v = Point::new(1, 1);
        let bad = |c: Point| c == Point::new(36, 36);
        let valid = valid_corner_choices(&g, v, [true; 4], &bad);
        assert!(!valid.is_empty());
        assert!(valid.iter().all(|c| c.s == 2));
    }

    #[test]
    fn probabilities_sum_to_one() {
        for (n, p) in [(1, Some(0)), (4, Some(1)), (3, None)] {
            let s: f64 = choice_probabilities(n, p, 1e-10).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
