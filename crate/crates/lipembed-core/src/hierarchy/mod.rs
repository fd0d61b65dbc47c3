//! The recursive block structure of one field family.
//!
//! Level 0 indexes sites (X) or `M0 x M0` site blocks (Y); every level-0 lattice block is
//! a single cell. Level `j >= 1` is built from level `j - 1` by deciding which shared
//! buffers are conjoined, percolating them into lattice blocks, drawing boundary curves
//! through the remaining buffers, and assigning every level-(j-1) cell to the level-j
//! cell whose domain it falls in.

pub mod check;
pub mod components;
pub mod curves;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::fields::{level0_embeds, level0_window, y_block_class, BitField, Family, Y0Class};
use crate::lattice::{side_buffer_rect, Grid, LatticeAnimal, Point, Rect, Side, CLOSE_PACKED};
use crate::params::{LevelGeometry, ParamError, ParameterSet};
use crate::stats;

pub use components::{form_components, form_lattice_blocks, non_neighbouring_subset, Partition};
pub use curves::{Bnd, CornerChoice, CurveChoices, Orient, Seg};

/// Deepest level this crate builds.
pub const MAX_DEPTH: u32 = 1;

/// Level-0 data of one cell: an X site bit or a Y block class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell0 {
    Bit(u8),
    Class(Y0Class),
}

impl Cell0 {
    pub fn is_good(self) -> bool {
        !matches!(self, Cell0::Class(Y0Class::Zero) | Cell0::Class(Y0Class::One))
    }
}

/// Level-0 embedding of one X cell into one Y cell, whichever order they come in.
pub fn cells_embed(x: Cell0, y: Cell0) -> bool {
    match (x, y) {
        (Cell0::Bit(b), Cell0::Class(c)) => level0_embeds(b, c),
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    GoodSingleton,
    SemiBad,
    ReallyBad,
    /// Bad component at the top built level whose embedding probability was not estimated.
    Unclassified,
}

impl Status {
    pub fn is_bad(self) -> bool {
        self != Status::GoodSingleton
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Status::GoodSingleton => "good",
            Status::SemiBad => "semibad",
            Status::ReallyBad => "reallybad",
            Status::Unclassified => "bad",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBlock {
    pub level: u32,
    pub animal: LatticeAnimal,
}

impl LatticeBlock {
    pub fn size(&self) -> usize {
        self.animal.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub level: u32,
    pub lattice_block: LatticeBlock,
    /// Level-(j-1) indices inside the domain (the cell itself at level 0).
    pub member_cells: Vec<Point>,
    pub good: bool,
    pub censored: bool,
    /// Number of bad level-(j-1) components inside.
    pub bad_count: u64,
    /// Their total size.
    pub bad_size: u64,
}

/// Number and total size of bad subcomponents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BadSummary {
    pub n: u64,
    pub k: u64,
}

/// Embedding probability of a component.
#[derive(Clone, Debug, PartialEq)]
pub enum SValue {
    Exact(BigRational),
    /// Monte Carlo, with the lower end of its confidence interval.
    Estimate { successes: u64, trials: u64, lower: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub level: u32,
    pub animal: LatticeAnimal,
    pub blocks: Vec<u32>,
    pub status: Status,
    pub bad_summary: BadSummary,
    pub s_value: Option<SValue>,
    pub censored: bool,
}

impl Component {
    pub fn size(&self) -> usize {
        self.animal.len()
    }
}

/// Bookkeeping for one shared buffer at level `j >= 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeState {
    /// Conjoined by the bad content of the buffer.
    pub conjoined: bool,
    /// Conjoined because no boundary curve could avoid the bad cells near it.
    pub forced: bool,
    /// The buffer reads censored level-(j-1) data.
    pub uncertain: bool,
    /// Buffer cells lying in bad components.
    pub bad_cells: u64,
}

impl EdgeState {
    pub fn joined(&self) -> bool {
        self.conjoined || self.forced
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelStructure {
    pub geometry: LevelGeometry,
    pub edges: BTreeMap<Bnd, EdgeState>,
    pub curves: CurveChoices,
    /// Owning level-j cell of every level-(j-1) cell in the blow-up of the window.
    pub owner: Grid<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub level: u32,
    pub window: Rect,
    pub blocks: Vec<Block>,
    pub block_of: Grid<u32>,
    pub components: Vec<Component>,
    pub comp_of: Grid<u32>,
    pub structure: Option<LevelStructure>,
}

impl Level {
    pub fn component_at(&self, p: Point) -> Option<&Component> {
        self.comp_of.get(p).map(|&c| &self.components[c as usize])
    }
    pub fn block_at(&self, p: Point) -> Option<&Block> {
        self.block_of.get(p).map(|&b| &self.blocks[b as usize])
    }
    /// Whether `p` lies in a bad component; `None` outside the window.
    pub fn is_bad_cell(&self, p: Point) -> Option<bool> {
        self.component_at(p).map(|c| c.status.is_bad())
    }
    /// Whether data at `p` cannot be trusted: outside the window or censored.
    pub fn is_censored_cell(&self, p: Point) -> bool {
        self.component_at(p).map_or(true, |c| c.censored)
    }
    pub fn bad_components(&self) -> impl Iterator<Item = (u32, &Component)> {
        self.components.iter().enumerate().filter(|(_, c)| c.status.is_bad()).map(|(i, c)| (i as u32, c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    pub family: Family,
    pub params: ParameterSet,
    pub field: BitField,
    pub cells0: Grid<Cell0>,
    pub levels: Vec<Level>,
}

impl Hierarchy {
    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }
    pub fn level(&self, j: u32) -> &Level {
        &self.levels[j as usize]
    }
    pub fn geometry(&self, j: u32) -> Option<&LevelGeometry> {
        self.levels.get(j as usize)?.structure.as_ref().map(|s| &s.geometry)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildError {
    Param(ParamError),
    WindowTooSmall { level: u32 },
    DepthUnsupported(u32),
    /// A query touched data outside the built window.
    NotBuilt(Rect),
}

impl From<ParamError> for BuildError {
    fn from(e: ParamError) -> Self {
        BuildError::Param(e)
    }
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::Param(e) => write!(f, "{e}"),
            BuildError::WindowTooSmall { level } => write!(f, "window too small to hold any level-{level} cell"),
            BuildError::DepthUnsupported(d) => write!(f, "depth {d} unsupported (max {MAX_DEPTH})"),
            BuildError::NotBuilt(r) => write!(f, "structure not built over {r:?}"),
        }
    }
}

/// Index window of level `j >= 1` inside the level-(j-1) window `lower`: cells whose
/// one-cell ring is fully covered.
pub fn upper_window(lower: Rect, r: i64) -> Rect {
    let up = |v: i64| v.div_euclid(r) + i64::from(v.rem_euclid(r) != 0);
    let w = Rect::new(up(lower.x0) + 1, up(lower.y0) + 1, lower.x1.div_euclid(r) - 1, lower.y1.div_euclid(r) - 1);
    if w.x1 <= w.x0 || w.y1 <= w.y0 {
        Rect::new(0, 0, 0, 0)
    } else {
        w
    }
}

/// Site window of `family` whose level-1 window is `w1` under `params`.
pub fn site_window_for(family: Family, w1: Rect, params: &ParameterSet) -> Result<Rect, ParamError> {
    let r = params.ratio(1)? as i64;
    let s = match family {
        Family::X => 1,
        Family::Y => params.m0 as i64,
    };
    Ok(Rect::new((w1.x0 - 1) * r * s, (w1.y0 - 1) * r * s, (w1.x1 + 1) * r * s, (w1.y1 + 1) * r * s))
}

/// A semi-bad partner component shape with its level-0 data, anchored at its first cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryEntry {
    pub cells: Vec<(Point, Cell0)>,
}

/// Semi-bad level-0 components of `partner` made only of bad cells, up to size `v0`.
pub fn semibad_library(partner: Family, params: &ParameterSet) -> Vec<LibraryEntry> {
    let thr = params.semibad_threshold(0);
    let mut out = Vec::new();
    if partner == Family::X {
        // X level-0 components are never bad.
        return out;
    }
    for v in 1..=params.v0 as usize {
        let s = BigRational::new(BigInt::from(1), BigInt::from(1u32) << v);
        if s < thr || v > params.shape_cap() {
            break;
        }
        let shapes = crate::lattice::enumerate_shapes(v, false, params.shape_cap()).unwrap_or_default();
        for shape in shapes {
            for mask in 0..(1u32 << v) {
                let cells = shape
                    .canonical_sites
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (p, Cell0::Class(if mask >> i & 1 == 1 { Y0Class::One } else { Y0Class::Zero })))
                    .collect();
                out.push(LibraryEntry { cells });
            }
        }
    }
    out
}

/// Builds levels `0..=depth` over a field window.
pub fn build(field: BitField, params: &ParameterSet, depth: u32) -> Result<Hierarchy, BuildError> {
    if depth > MAX_DEPTH {
        return Err(BuildError::DepthUnsupported(depth));
    }
    params.validate()?;
    let family = field.family;
    let (cells0, level0) = build_level0(&field, params)?;
    let mut h = Hierarchy { family, params: params.clone(), field, cells0, levels: vec![level0] };
    for j in 1..=depth {
        let g = params.level_geometry(j)?;
        let library = semibad_library(family.partner(), params);
        let seed = h.field.seed;
        let next = build_upper(&h.levels[j as usize - 1], &h.cells0, family, j, g, params, seed, &library)?;
        h.levels.push(next);
    }
    Ok(h)
}

fn build_level0(field: &BitField, params: &ParameterSet) -> Result<(Grid<Cell0>, Level), BuildError> {
    let w = level0_window(field, params.m0);
    if w.is_empty() {
        return Err(BuildError::WindowTooSmall { level: 0 });
    }
    let mut cells = Grid::new(w, Cell0::Bit(0));
    for p in w.points() {
        let c = match field.family {
            Family::X => Cell0::Bit(field.bit(p)),
            Family::Y => Cell0::Class(y_block_class(field, p, params)),
        };
        cells.set(p, c);
    }
    let part = form_lattice_blocks(w, |_, _| false);
    let good: Vec<bool> = part.groups.iter().map(|g| cells[g[0]].is_good()).collect();
    let blocks: Vec<Block> = part
        .groups
        .iter()
        .zip(&good)
        .map(|(g, &ok)| Block {
            level: 0,
            lattice_block: LatticeBlock { level: 0, animal: LatticeAnimal::singleton(g[0]) },
            member_cells: vec![g[0]],
            good: ok,
            censored: false,
            bad_count: 0,
            bad_size: 0,
        })
        .collect();
    let comps = form_components(&part, &good);
    let thr = params.semibad_threshold(0);
    let components = comps
        .groups
        .iter()
        .map(|g| {
            let block_ids: Vec<u32> = g.iter().map(|&p| part.label[p]).collect();
            let single_good = g.len() == 1 && good[block_ids[0] as usize];
            let data: Vec<Cell0> = g.iter().map(|&p| cells[p]).collect();
            let (status, s_value) = if single_good {
                (Status::GoodSingleton, None)
            } else {
                let s = stats::exact_s0(field.family, &data, params);
                let semi = g.len() as u64 <= params.v0 && s >= thr;
                (if semi { Status::SemiBad } else { Status::ReallyBad }, Some(SValue::Exact(s)))
            };
            Component {
                level: 0,
                animal: LatticeAnimal::new(g.clone()).expect("components are connected"),
                blocks: block_ids,
                status,
                bad_summary: BadSummary::default(),
                s_value,
                censored: touches_border(g, w),
            }
        })
        .collect();
    let level = Level { level: 0, window: w, blocks, block_of: part.label.clone(), components, comp_of: comps.label, structure: None };
    Ok((cells, level))
}

fn touches_border(cells: &[Point], w: Rect) -> bool {
    cells.iter().any(|&p| CLOSE_PACKED.iter().any(|&d| !w.contains(p.add(d))))
}

/// Lower-level cells of the shared buffer behind boundary `b`.
pub fn buffer_rect(g: &LevelGeometry, b: Bnd) -> Rect {
    let side = match b.orient {
        Orient::H => Side::T,
        Orient::V => Side::R,
    };
    side_buffer_rect(b.cell, side, g.ratio, g.margin)
}

/// Result of testing one shared buffer against the level below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjoinedInfo {
    pub conjoined: bool,
    pub bad_cells: u64,
    /// Bad components meeting the buffer.
    pub components: Vec<u32>,
    pub uncertain: bool,
}

/// Conjoined test for a buffer `rect` (level-(j-1) cells): more than `k0` buffer cells
/// in bad components, or a bad component meeting the buffer that is not semi-bad.
pub fn is_conjoined(rect: Rect, lower: &Level, k0: u64) -> Result<ConjoinedInfo, BuildError> {
    if !lower.window.contains_rect(&rect) {
        return Err(BuildError::NotBuilt(rect));
    }
    let mut bad_cells = 0u64;
    let mut comps = BTreeSet::new();
    let mut uncertain = false;
    for p in rect.points() {
        let id = lower.comp_of[p];
        let c = &lower.components[id as usize];
        uncertain |= c.censored;
        if c.status.is_bad() {
            bad_cells += 1;
            comps.insert(id);
        }
    }
    let not_semi = comps.iter().any(|&i| lower.components[i as usize].status != Status::SemiBad);
    Ok(ConjoinedInfo { conjoined: bad_cells > k0 || not_semi, bad_cells, components: comps.into_iter().collect(), uncertain })
}

/// A boundary curve of one ideal multi-block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCurve {
    pub level: u32,
    pub corners: Vec<(Point, CornerChoice)>,
    pub edges: Vec<(Bnd, u8)>,
    /// Pieces along the outer boundary, in level-(j-1) lattice coordinates.
    pub polyline: Vec<Seg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveError {
    NoValidCorner(Point),
    NoValidEdge(Bnd),
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::NoValidCorner(v) => write!(f, "no valid corner choice at vertex {v}"),
            CurveError::NoValidEdge(b) => write!(f, "no valid track for boundary {:?} at {}", b.orient, b.cell),
        }
    }
}

fn cell_vertices(cells: &[Point]) -> BTreeSet<Point> {
    let mut vs = BTreeSet::new();
    for &u in cells {
        for d in [Point::new(0, 0), Point::new(1, 0), Point::new(0, 1), Point::new(1, 1)] {
            vs.insert(u.add(d));
        }
    }
    vs
}

fn cell_sides(u: Point) -> [Bnd; 4] {
    [
        Bnd::between(u, u.add(Point::new(1, 0))),
        Bnd::between(u, u.add(Point::new(-1, 0))),
        Bnd::between(u, u.add(Point::new(0, 1))),
        Bnd::between(u, u.add(Point::new(0, -1))),
    ]
}

fn arms_on(v: Point, joined: &dyn Fn(Bnd) -> bool) -> [bool; 4] {
    curves::arms(v).map(|b| !joined(b))
}

/// Draws a valid boundary curve for `ideal` at level `j`. Corners at every vertex of the
/// multi-block and tracks on every non-conjoined side of its cells are drawn with the
/// counter-keyed distribution of [`curves::choose_corner`] / [`curves::choose_edge`], so
/// neighbouring blocks drawing separately agree on shared pieces.
pub fn select_boundary_curve(
    ideal: &LatticeAnimal,
    g: &LevelGeometry,
    seed: u64,
    bad: &dyn Fn(Point) -> bool,
    joined: &dyn Fn(Bnd) -> bool,
) -> Result<BoundaryCurve, CurveError> {
    let j = g.level;
    let mut ch = CurveChoices::default();
    for v in cell_vertices(ideal.sites()) {
        let on = arms_on(v, joined);
        if !on.iter().any(|&b| b) {
            continue;
        }
        let valid = curves::valid_corner_choices(g, v, on, bad);
        if valid.is_empty() {
            return Err(CurveError::NoValidCorner(v));
        }
        ch.corners.insert(v, curves::choose_corner(&valid, seed, j, v));
    }
    let mut sides = BTreeSet::new();
    for &u in ideal.sites() {
        for b in cell_sides(u) {
            if !joined(b) {
                sides.insert(b);
            }
        }
    }
    for b in sides {
        let (v0, v1) = b.ends();
        let (a0, a1) = (g.corner_radii[ch.corner(v0).l as usize - 1], g.corner_radii[ch.corner(v1).l as usize - 1]);
        let valid = curves::valid_edge_choices(g, b, a0, a1, bad);
        if valid.is_empty() {
            return Err(CurveError::NoValidEdge(b));
        }
        ch.edges.insert(b, curves::choose_edge(&valid, seed, j, b));
    }
    Ok(curve_of(ideal, g, &ch))
}

/// The realized outer boundary of `ideal` under `ch`.
pub fn curve_of(ideal: &LatticeAnimal, g: &LevelGeometry, ch: &CurveChoices) -> BoundaryCurve {
    let outer = |b: Bnd| {
        let (p, q) = b.cells();
        ideal.contains(p) != ideal.contains(q)
    };
    let mut polyline = Vec::new();
    let mut corners = Vec::new();
    for v in cell_vertices(ideal.sites()) {
        let c = ch.corner(v);
        corners.push((v, c));
        let on = curves::arms(v).map(outer);
        if on.iter().any(|&b| b) {
            polyline.extend(curves::corner_segments(g, v, on, c));
        }
    }
    let mut edges = Vec::new();
    let mut sides = BTreeSet::new();
    for &u in ideal.sites() {
        sides.extend(cell_sides(u));
    }
    for b in sides {
        let s = ch.edge(b);
        edges.push((b, s));
        if outer(b) {
            let (v0, v1) = b.ends();
            let (a0, a1) = (g.corner_radii[ch.corner(v0).l as usize - 1], g.corner_radii[ch.corner(v1).l as usize - 1]);
            polyline.extend(curves::edge_segments(g, b, a0, a1, s));
        }
    }
    polyline.sort();
    BoundaryCurve { level: g.level, corners, edges, polyline }
}

/// Member cells of a domain given as a set of owned unit cells over `candidates`: cells
/// inside the domain, plus cells whose north-east corner is an interior point of it.
pub fn form_block(candidates: Rect, in_domain: &dyn Fn(Point) -> bool) -> Vec<Point> {
    candidates
        .points()
        .filter(|&c| {
            in_domain(c)
                || [Point::new(0, 0), Point::new(1, 0), Point::new(0, 1), Point::new(1, 1)].iter().all(|&d| in_domain(c.add(d)))
        })
        .collect()
}

/// Outcome of the goodness test of a level-j block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodCheck {
    pub good: bool,
    pub bad_count: u64,
    pub bad_size: u64,
    pub all_semibad: bool,
    pub airports: bool,
}

/// Goodness of a block with `member_cells` over the level below: size 1, bad
/// subcomponents of total size at most `k0`, all of them semi-bad, and every
/// `airport_side`-square of member cells an airport.
pub fn classify_good_block(
    size: usize,
    member_cells: &[Point],
    lower: &Level,
    cells0: &Grid<Cell0>,
    params: &ParameterSet,
    g: &LevelGeometry,
    library: &[LibraryEntry],
) -> GoodCheck {
    let mut comps = BTreeSet::new();
    for &p in member_cells {
        if let Some(c) = lower.comp_of.get(p) {
            if lower.components[*c as usize].status.is_bad() {
                comps.insert(*c);
            }
        }
    }
    let bad_size: u64 = comps.iter().map(|&c| lower.components[c as usize].size() as u64).sum();
    let all_semibad = comps.iter().all(|&c| lower.components[c as usize].status == Status::SemiBad);
    let mut good = size == 1 && bad_size <= params.k0 && all_semibad;
    let mut airports = true;
    if good && !library.is_empty() {
        let members: BTreeSet<Point> = member_cells.iter().copied().collect();
        let a = g.airport_side;
        let frac = params.airport_fraction(g.level - 1);
        let bb = Rect::bounding(member_cells);
        'outer: for y in bb.y0..=bb.y1 - a {
            for x in bb.x0..=bb.x1 - a {
                let sq = Rect::new(x, y, x + a, y + a);
                if sq.points().all(|p| members.contains(&p)) && !is_airport(sq, lower, cells0, library, &frac) {
                    airports = false;
                    break 'outer;
                }
            }
        }
        good = airports;
    }
    GoodCheck { good, bad_count: comps.len() as u64, bad_size, all_semibad, airports }
}

/// Airport test of square `sq` (level-0 cells): for every library entry, at least `frac` of
/// its translates inside `sq` sit on good singleton blocks and embed cellwise.
pub fn is_airport(sq: Rect, lower: &Level, cells0: &Grid<Cell0>, library: &[LibraryEntry], frac: &BigRational) -> bool {
    for e in library {
        let pts: Vec<Point> = e.cells.iter().map(|c| c.0).collect();
        let bb = Rect::bounding(&pts);
        let (w, h) = (bb.width(), bb.height());
        if w > sq.width() || h > sq.height() {
            continue;
        }
        let total = (sq.width() - w + 1) * (sq.height() - h + 1);
        let mut hits = 0i64;
        for oy in sq.y0 - bb.y0..=sq.y1 - bb.y1 {
            for ox in sq.x0 - bb.x0..=sq.x1 - bb.x1 {
                let o = Point::new(ox, oy);
                let ok = e.cells.iter().all(|&(p, d)| {
                    let q = p.add(o);
                    let valid = lower.component_at(q).is_some_and(|c| c.status == Status::GoodSingleton && !c.censored);
                    valid
                        && match d {
                            Cell0::Class(_) => cells_embed(cells0[q], d),
                            Cell0::Bit(_) => cells_embed(d, cells0[q]),
                        }
                });
                hits += i64::from(ok);
            }
        }
        if BigRational::from_integer(BigInt::from(hits)) < frac * BigRational::from_integer(BigInt::from(total)) {
            return false;
        }
    }
    true
}

/// Semi-bad decision: `V <= v0` and `S >= 1 - 1/(v0^5 k0^4 100^j)`, using the lower
/// confidence bound when `S` is estimated.
pub fn classify_semibad(size: usize, s: &SValue, level: u32, params: &ParameterSet) -> bool {
    if size as u64 > params.v0 {
        return false;
    }
    let thr = params.semibad_threshold(level);
    match s {
        SValue::Exact(v) => *v >= thr,
        SValue::Estimate { lower, .. } => match BigRational::from_float(*lower) {
            Some(l) => l >= thr,
            None => false,
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn build_upper(
    lo: &Level,
    cells0: &Grid<Cell0>,
    family: Family,
    j: u32,
    g: LevelGeometry,
    params: &ParameterSet,
    seed: u64,
    library: &[LibraryEntry],
) -> Result<Level, BuildError> {
    let r = g.ratio;
    let w = upper_window(lo.window, r);
    if w.is_empty() {
        return Err(BuildError::WindowTooSmall { level: j });
    }
    let bad = |p: Point| lo.is_bad_cell(p).unwrap_or(false);

    // Shared buffers with at least one side in the window.
    let mut edges: BTreeMap<Bnd, EdgeState> = BTreeMap::new();
    for u in w.points() {
        for b in cell_sides(u) {
            if edges.contains_key(&b) {
                continue;
            }
            let info = is_conjoined(buffer_rect(&g, b), lo, params.k0)?;
            edges.insert(b, EdgeState { conjoined: info.conjoined, forced: false, uncertain: info.uncertain, bad_cells: info.bad_cells });
        }
    }
    let vertices: Vec<Point> = Rect::new(w.x0, w.y0, w.x1 + 1, w.y1 + 1).points().collect();

    // Conjoin around vertices with no valid corner until every vertex has one.
    loop {
        let mut forced = Vec::new();
        for &v in &vertices {
            let on = arms_on(v, &|b| edges.get(&b).map_or(true, |e| e.joined()));
            if on.iter().any(|&b| b) && curves::valid_corner_choices(&g, v, on, &bad).is_empty() {
                for (k, b) in curves::arms(v).into_iter().enumerate() {
                    if on[k] {
                        forced.push(b);
                    }
                }
            }
        }
        if forced.is_empty() {
            break;
        }
        for b in forced {
            edges.get_mut(&b).expect("arm of a window vertex").forced = true;
        }
    }
    let mut ch = CurveChoices::default();
    for &v in &vertices {
        let on = arms_on(v, &|b| edges.get(&b).map_or(true, |e| e.joined()));
        if on.iter().any(|&b| b) {
            let valid = curves::valid_corner_choices(&g, v, on, &bad);
            ch.corners.insert(v, curves::choose_corner(&valid, seed, j, v));
        }
    }
    let keys: Vec<Bnd> = edges.keys().copied().collect();
    for b in keys {
        if edges[&b].joined() {
            continue;
        }
        let (v0, v1) = b.ends();
        let (a0, a1) = (g.corner_radii[ch.corner(v0).l as usize - 1], g.corner_radii[ch.corner(v1).l as usize - 1]);
        let valid = curves::valid_edge_choices(&g, b, a0, a1, &bad);
        if valid.is_empty() {
            edges.get_mut(&b).unwrap().forced = true;
        } else {
            ch.edges.insert(b, curves::choose_edge(&valid, seed, j, b));
        }
    }

    let part = form_lattice_blocks(w, |u, v| edges[&Bnd::between(u, v)].joined());

    // Ownership over the blow-up of the window.
    let region = Rect::new((w.x0 - 1) * r, (w.y0 - 1) * r, (w.x1 + 1) * r, (w.y1 + 1) * r).intersect(&lo.window);
    let mut owner = Grid::new(region, Point::new(0, 0));
    for c in region.points() {
        owner.set(c, ch.owner(&g, c));
    }

    let mut blocks = Vec::with_capacity(part.groups.len());
    let mut good = Vec::with_capacity(part.groups.len());
    for cells in &part.groups {
        let animal = LatticeAnimal::new(cells.clone()).expect("lattice blocks are connected");
        let mut hull = Rect::bounding(cells);
        hull = Rect::new(hull.x0 * r, hull.y0 * r, hull.x1 * r, hull.y1 * r).inflate(g.margin);
        let cand = hull.intersect(&region);
        let mut member_cells = form_block(cand, &|c| owner.get(c).is_some_and(|o| animal.contains(*o)));
        member_cells.sort();
        let check = classify_good_block(cells.len(), &member_cells, lo, cells0, params, &g, library);
        let mut censored = !lo.window.contains_rect(&hull);
        for &u in cells {
            for b in cell_sides(u) {
                let e = &edges[&b];
                let (p, q) = b.cells();
                censored |= e.uncertain || (e.joined() && !(w.contains(p) && w.contains(q)));
            }
        }
        if !censored {
            censored = hull.points().any(|c| animal_blowup_contains(cells, r, g.margin, c) && lo.is_censored_cell(c));
        }
        good.push(check.good);
        blocks.push(Block {
            level: j,
            lattice_block: LatticeBlock { level: j, animal },
            member_cells,
            good: check.good,
            censored,
            bad_count: check.bad_count,
            bad_size: check.bad_size,
        });
    }
    let _ = family;
    let comps = form_components(&part, &good);
    let components = comps
        .groups
        .iter()
        .map(|cells| {
            let mut ids: Vec<u32> = cells.iter().map(|&p| part.label[p]).collect();
            ids.sort();
            ids.dedup();
            let single_good = ids.len() == 1 && blocks[ids[0] as usize].good && cells.len() == 1;
            let summary = ids.iter().fold(BadSummary::default(), |s, &b| BadSummary {
                n: s.n + blocks[b as usize].bad_count,
                k: s.k + blocks[b as usize].bad_size,
            });
            Component {
                level: j,
                animal: LatticeAnimal::new(cells.clone()).expect("components are connected"),
                status: if single_good { Status::GoodSingleton } else { Status::Unclassified },
                censored: ids.iter().any(|&b| blocks[b as usize].censored) || touches_border(cells, w),
                blocks: ids,
                bad_summary: summary,
                s_value: None,
            }
        })
        .collect();
    Ok(Level {
        level: j,
        window: w,
        blocks,
        block_of: part.label,
        components,
        comp_of: comps.label,
        structure: Some(LevelStructure { geometry: g, edges, curves: ch, owner }),
    })
}

/// Whether level-(j-1) cell `c` is within `m` cells (L-infinity) of the multi-cell `cells`.
fn animal_blowup_contains(cells: &[Point], r: i64, m: i64, c: Point) -> bool {
    cells.iter().any(|u| {
        let dx = (u.x * r - c.x).max(c.x - (u.x * r + r - 1)).max(0);
        let dy = (u.y * r - c.y).max(c.y - (u.y * r + r - 1)).max(0);
        dx.max(dy) <= m
    })
}

/// Ideal interior of a multi-cell in level-(j-1) cells: cells whose `m`-neighbourhood
/// lies inside the multi-cell.
pub fn ideal_interior(cells: &[Point], r: i64, m: i64) -> Vec<Point> {
    let set: BTreeSet<Point> = cells.iter().copied().collect();
    let inside = |c: Point| set.contains(&Point::new(c.x.div_euclid(r), c.y.div_euclid(r)));
    let mut out = Vec::new();
    for &u in cells {
        for c in Rect::new(u.x * r, u.y * r, u.x * r + r, u.y * r + r).points() {
            if Rect::new(c.x - m, c.y - m, c.x + m + 1, c.y + m + 1).points().all(inside) {
                out.push(c);
            }
        }
    }
    out.sort();
    out
}

/// Ideal blow-up of a multi-cell: cells within `m` of it.
pub fn ideal_blowup_contains(cells: &[Point], r: i64, m: i64, c: Point) -> bool {
    animal_blowup_contains(cells, r, m, c)
}
