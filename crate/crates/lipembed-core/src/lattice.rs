//! Lattice animals, shapes, neighbourhoods, and the cell/buffer geometry of each level.
//!
//! Cell geometry is kept in site units (X sites): the level-0 cell has side `L0`, the level-j cell
//! side `L_j`. The hierarchy itself works in level-(j-1) cell indices.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::params::{ParamError, ParameterSet};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
    pub fn linf(self, o: Point) -> i64 {
        (self.x - o.x).abs().max((self.y - o.y).abs())
    }
    pub fn dist2(self, o: Point) -> i64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Half-open integer rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub const fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Rect { x0, y0, x1, y1 }
    }
    pub fn width(&self) -> i64 {
        (self.x1 - self.x0).max(0)
    }
    pub fn height(&self) -> i64 {
        (self.y1 - self.y0).max(0)
    }
    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }
    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }
    /// Closed containment of `other` (as half-open sets).
    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.is_empty() || (o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1)
    }
    pub fn intersect(&self, o: &Rect) -> Rect {
        Rect::new(self.x0.max(o.x0), self.y0.max(o.y0), self.x1.min(o.x1), self.y1.min(o.y1))
    }
    pub fn inflate(&self, d: i64) -> Rect {
        Rect::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let (x0, x1) = (self.x0, self.x1);
        (self.y0..self.y1).flat_map(move |y| (x0..x1).map(move |x| Point::new(x, y)))
    }
    /// Row-major offset of `p`, which must lie inside.
    pub fn offset(&self, p: Point) -> usize {
        ((p.y - self.y0) * self.width() + (p.x - self.x0)) as usize
    }
    pub fn bounding(points: &[Point]) -> Rect {
        let mut r = Rect::new(i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in points {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x + 1);
            r.y1 = r.y1.max(p.y + 1);
        }
        if points.is_empty() {
            Rect::new(0, 0, 0, 0)
        } else {
            r
        }
    }
}

/// Dense per-index storage over a rectangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid<T> {
    pub rect: Rect,
    pub data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn new(rect: Rect, fill: T) -> Self {
        Grid { rect, data: vec![fill; rect.area() as usize] }
    }
    pub fn get(&self, p: Point) -> Option<&T> {
        if self.rect.contains(p) {
            Some(&self.data[self.rect.offset(p)])
        } else {
            None
        }
    }
    pub fn set(&mut self, p: Point, v: T) {
        let o = self.rect.offset(p);
        self.data[o] = v;
    }
}

impl<T> core::ops::Index<Point> for Grid<T> {
    type Output = T;
    fn index(&self, p: Point) -> &T {
        assert!(self.rect.contains(p), "grid index {p} outside {:?}", self.rect);
        &self.data[self.rect.offset(p)]
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NeighborMode {
    Euclidean,
    ClosePacked,
}

pub const EUCLID: [Point; 4] = [Point::new(1, 0), Point::new(-1, 0), Point::new(0, 1), Point::new(0, -1)];
pub const CLOSE_PACKED: [Point; 8] = [
    Point::new(1, 0),
    Point::new(1, 1),
    Point::new(0, 1),
    Point::new(-1, 1),
    Point::new(-1, 0),
    Point::new(-1, -1),
    Point::new(0, -1),
    Point::new(1, -1),
];

pub fn neighbors(u: Point, mode: NeighborMode) -> Vec<Point> {
    match mode {
        NeighborMode::Euclidean => EUCLID.iter().map(|d| u.add(*d)).collect(),
        NeighborMode::ClosePacked => CLOSE_PACKED.iter().map(|d| u.add(*d)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnimalError {
    Empty,
    Disconnected,
}

/// A finite nonempty 4-connected subset of `Z^2`, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeAnimal {
    sites: Vec<Point>,
}

impl LatticeAnimal {
    pub fn new(mut sites: Vec<Point>) -> Result<Self, AnimalError> {
        sites.sort();
        sites.dedup();
        if sites.is_empty() {
            return Err(AnimalError::Empty);
        }
        if !is_connected(&sites) {
            return Err(AnimalError::Disconnected);
        }
        Ok(LatticeAnimal { sites })
    }
    pub fn singleton(p: Point) -> Self {
        LatticeAnimal { sites: vec![p] }
    }
    pub fn sites(&self) -> &[Point] {
        &self.sites
    }
    pub fn len(&self) -> usize {
        self.sites.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn contains(&self, p: Point) -> bool {
        self.sites.binary_search(&p).is_ok()
    }
    pub fn translate(&self, d: Point) -> LatticeAnimal {
        LatticeAnimal { sites: self.sites.iter().map(|p| p.add(d)).collect() }
    }
    pub fn shape(&self) -> Shape {
        Shape::of(&self.sites)
    }
}

/// 4-connectivity of a sorted, deduplicated point list.
pub fn is_connected(sorted: &[Point]) -> bool {
    if sorted.is_empty() {
        return false;
    }
    let mut seen = vec![false; sorted.len()];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for d in EUCLID {
            if let Ok(j) = sorted.binary_search(&sorted[i].add(d)) {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
    }
    count == sorted.len()
}

/// Translation class of a point set: translated so the least site is the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub canonical_sites: Vec<Point>,
}

impl Shape {
    pub fn of(points: &[Point]) -> Shape {
        let mut s: Vec<Point> = points.to_vec();
        s.sort();
        s.dedup();
        let base = s.first().copied().unwrap_or_default();
        Shape { canonical_sites: s.iter().map(|p| p.sub(base)).collect() }
    }
    pub fn len(&self) -> usize {
        self.canonical_sites.len()
    }
    pub fn is_empty(&self) -> bool {
        self.canonical_sites.is_empty()
    }
}

/// The translation taking `a` onto `b`, if one exists.
pub fn same_shape(a: &LatticeAnimal, b: &LatticeAnimal) -> Option<Point> {
    same_shape_points(a.sites(), b.sites())
}

/// Same as [`same_shape`] on sorted point lists.
pub fn same_shape_points(a: &[Point], b: &[Point]) -> Option<Point> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let d = b[0].sub(a[0]);
    if a.iter().zip(b).all(|(p, q)| p.add(d) == *q) {
        Some(d)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapExceeded {
    pub requested: u64,
    pub cap: u64,
}

/// All fixed polyominoes of `size` cells (canonical form), sorted. With
/// `containing_origin`, instead every animal of that size containing the origin
/// (each translate of each shape that covers `(0,0)`).
pub fn enumerate_shapes(size: usize, containing_origin: bool, cap: usize) -> Result<Vec<Shape>, CapExceeded> {
    if size == 0 || size > cap {
        return Err(CapExceeded { requested: size as u64, cap: cap as u64 });
    }
    // Redelmeier-style growth: extend every canonical shape of size n-1 by one cell.
    let mut level: BTreeSet<Vec<Point>> = BTreeSet::new();
    level.insert(vec![Point::new(0, 0)]);
    for _ in 1..size {
        let mut next = BTreeSet::new();
        for s in &level {
            let set: BTreeSet<Point> = s.iter().copied().collect();
            for p in s {
                for d in EUCLID {
                    let q = p.add(d);
                    if !set.contains(&q) {
                        let mut t = s.clone();
                        t.push(q);
                        next.insert(Shape::of(&t).canonical_sites);
                    }
                }
            }
        }
        level = next;
    }
    let shapes: Vec<Shape> = level.into_iter().map(|c| Shape { canonical_sites: c }).collect();
    if !containing_origin {
        return Ok(shapes);
    }
    let mut out = BTreeSet::new();
    for s in &shapes {
        for p in &s.canonical_sites {
            let moved: Vec<Point> = s.canonical_sites.iter().map(|q| q.sub(*p)).collect();
            out.insert(moved);
        }
    }
    Ok(out.into_iter().map(|c| Shape { canonical_sites: c }).collect())
}

/// Squares of one cell in site units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellGeometry {
    pub level: u32,
    pub index: Point,
    pub region: Rect,
    pub interior: Rect,
    pub blowup: Rect,
    pub margin: i64,
}

/// Cell `u` at level `j` with interior/blow-up inset/outset by the configured margin.
pub fn cell_geometry(j: u32, u: Point, params: &ParameterSet) -> Result<CellGeometry, ParamError> {
    let l = params.scale(j)? as i64;
    let margin = if j == 0 { 0 } else { params.margin_site_units(j)? as i64 };
    let x0 = u.x.checked_mul(l).ok_or(ParamError::ScaleOverflow(j))?;
    let y0 = u.y.checked_mul(l).ok_or(ParamError::ScaleOverflow(j))?;
    let region = Rect::new(x0, y0, x0 + l, y0 + l);
    Ok(CellGeometry {
        level: j,
        index: u,
        region,
        interior: region.inflate(-margin),
        blowup: region.inflate(margin),
        margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    T,
    L,
    B,
    R,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::T, Side::L, Side::B, Side::R];
    pub fn dir(self) -> Point {
        match self {
            Side::T => Point::new(0, 1),
            Side::L => Point::new(-1, 0),
            Side::B => Point::new(0, -1),
            Side::R => Point::new(1, 0),
        }
    }
    pub fn letter(self) -> char {
        match self {
            Side::T => 'T',
            Side::L => 'L',
            Side::B => 'B',
            Side::R => 'R',
        }
    }
}

/// A side buffer: the intersection of the buffer annuli of two Euclidean-neighbour cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BufferZone {
    pub level: u32,
    pub owner: Point,
    pub side: Side,
    pub extent: Rect,
    pub shared_with: Point,
}

/// Side buffer rectangle for cell `u` of side `l` and buffer half-width `m`,
/// in whatever unit `l` and `m` are given.
pub fn side_buffer_rect(u: Point, side: Side, l: i64, m: i64) -> Rect {
    let (x0, y0) = (u.x * l, u.y * l);
    match side {
        Side::T => Rect::new(x0 - m, y0 + l - m, x0 + l + m, y0 + l + m),
        Side::B => Rect::new(x0 - m, y0 - m, x0 + l + m, y0 + m),
        Side::L => Rect::new(x0 - m, y0 - m, x0 + m, y0 + l + m),
        Side::R => Rect::new(x0 + l - m, y0 - m, x0 + l + m, y0 + l + m),
    }
}

pub fn side_buffer(j: u32, u: Point, side: Side, params: &ParameterSet) -> Result<BufferZone, ParamError> {
    let l = params.scale(j)? as i64;
    let m = params.margin_site_units(j)? as i64;
    Ok(BufferZone { level: j, owner: u, side, extent: side_buffer_rect(u, side, l, m), shared_with: u.add(side.dir()) })
}

/// Side buffers of the animal's cells shared with cells outside the animal.
pub fn outer_buffers(animal: &LatticeAnimal, j: u32, params: &ParameterSet) -> Result<Vec<BufferZone>, ParamError> {
    let mut out = Vec::new();
    for &u in animal.sites() {
        for side in Side::ALL {
            if !animal.contains(u.add(side.dir())) {
                out.push(side_buffer(j, u, side, params)?);
            }
        }
    }
    Ok(out)
}
