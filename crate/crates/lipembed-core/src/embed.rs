//! Cell correspondences between blocks and site-level Lipschitz embeddings.
//!
//! A level-1 embedding is assembled in two steps. A cell correspondence sends every
//! level-0 X cell of the source block to a level-0 Y cell of the target block, matching
//! bad sets on either side by a common translate. It is then flattened: each X site picks
//! an unused site of the right value inside its target Y block.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::fields::{y_block_rect, BitField, Family};
use crate::hierarchy::{cells_embed, Cell0, Hierarchy, Level, Status};
use crate::lattice::{LatticeAnimal, Point, Rect};
use crate::params::ParameterSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedError {
    MarginViolated,
    IncompatibleVariants,
    SizeBound,
    OffsetOutOfRange(Point),
    TargetOutside,
    ImageOutside(Point),
    NotBuilt,
    WrongFamilies,
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::MarginViolated => write!(f, "matched set too close to the domain boundary"),
            EmbedError::IncompatibleVariants => write!(f, "source and target variants differ in size"),
            EmbedError::SizeBound => write!(f, "bad sets exceed v0 * k0 cells"),
            EmbedError::OffsetOutOfRange(h) => write!(f, "offset {h} outside the family range"),
            EmbedError::TargetOutside => write!(f, "translated set leaves the domain"),
            EmbedError::ImageOutside(p) => write!(f, "image {p} outside the target window"),
            EmbedError::NotBuilt => write!(f, "hierarchy not built to the requested level"),
            EmbedError::WrongFamilies => write!(f, "expected an X hierarchy and a Y hierarchy"),
        }
    }
}

/// A map from the member cells of a source domain to cells of a target domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellCorrespondence {
    pub level: u32,
    pub source: Vec<Point>,
    pub target: Vec<Point>,
    pub map: BTreeMap<Point, Point>,
    /// `(T_i, image)` for source sets moved as a whole.
    pub forward: Vec<(Vec<Point>, Vec<Point>)>,
    /// `(preimage, T'_k)` for target sets pulled back as a whole.
    pub backward: Vec<(Vec<Point>, Vec<Point>)>,
    /// Largest L-infinity displacement of any cell.
    pub displacement_budget: i64,
}

impl CellCorrespondence {
    fn finish(level: u32, source: Vec<Point>, target: Vec<Point>, map: BTreeMap<Point, Point>, forward: Vec<(Vec<Point>, Vec<Point>)>, backward: Vec<(Vec<Point>, Vec<Point>)>) -> Self {
        let displacement_budget = map.iter().map(|(a, b)| a.linf(*b)).max().unwrap_or(0);
        CellCorrespondence { level, source, target, map, forward, backward, displacement_budget }
    }
    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }
    pub fn is_injective(&self) -> bool {
        let img: BTreeSet<Point> = self.map.values().copied().collect();
        img.len() == self.map.len()
    }
}

/// Site-level map `phi` with its Lipschitz bound.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMap {
    pub phi: Vec<(Point, Point)>,
    pub m: f64,
}

/// Gap in whole cells between two cell sets (L-infinity); 0 when they touch or overlap.
fn set_gap(a: &[Point], b: &[Point]) -> i64 {
    let mut best = i64::MAX;
    for p in a {
        for q in b {
            best = best.min(p.linf(*q) - 1);
        }
    }
    best
}

/// Gap from `set` to the complement of `domain`.
fn boundary_gap(set: &[Point], domain: &BTreeSet<Point>) -> i64 {
    let mut best = i64::MAX;
    for &p in set {
        let mut d = 0;
        'grow: loop {
            for q in Rect::new(p.x - d, p.y - d, p.x + d + 1, p.y + d + 1).points() {
                if q.linf(p) == d && !domain.contains(&q) {
                    break 'grow;
                }
            }
            d += 1;
        }
        best = best.min(d - 1);
    }
    best
}

/// Bijection of `domain` that is the identity away from the sets `t` and carries each
/// source variant onto its target variant. Cells of `hull_i \ source_i` go to
/// `hull_i \ target_i` in sorted order, where `hull_i` is the one-cell dilation of the
/// bounding box of `t_i`, `source_i` and `target_i`.
pub fn star_canonical(
    domain: &[Point],
    t: &[Vec<Point>],
    source_variants: &[Vec<Point>],
    target_variants: &[Vec<Point>],
    interior_margin: i64,
) -> Result<CellCorrespondence, EmbedError> {
    let dom: BTreeSet<Point> = domain.iter().copied().collect();
    if t.len() != source_variants.len() || t.len() != target_variants.len() {
        return Err(EmbedError::IncompatibleVariants);
    }
    let mut map: BTreeMap<Point, Point> = domain.iter().map(|&p| (p, p)).collect();
    for i in 0..t.len() {
        if boundary_gap(&t[i], &dom) < interior_margin {
            return Err(EmbedError::MarginViolated);
        }
        let (s, g) = (&source_variants[i], &target_variants[i]);
        if s.len() != g.len() {
            return Err(EmbedError::IncompatibleVariants);
        }
        let all: Vec<Point> = t[i].iter().chain(s).chain(g).copied().collect();
        let hull = Rect::bounding(&all).inflate(1);
        if !hull.points().all(|p| dom.contains(&p)) {
            return Err(EmbedError::MarginViolated);
        }
        let mut ss = s.clone();
        let mut gg = g.clone();
        ss.sort();
        gg.sort();
        for (a, b) in ss.iter().zip(&gg) {
            map.insert(*a, *b);
        }
        let sset: BTreeSet<Point> = ss.iter().copied().collect();
        let gset: BTreeSet<Point> = gg.iter().copied().collect();
        let rest_s: Vec<Point> = hull.points().filter(|p| !sset.contains(p)).collect();
        let rest_g: Vec<Point> = hull.points().filter(|p| !gset.contains(p)).collect();
        for (a, b) in rest_s.iter().zip(&rest_g) {
            map.insert(*a, *b);
        }
    }
    Ok(CellCorrespondence::finish(0, domain.to_vec(), domain.to_vec(), map, Vec::new(), Vec::new()))
}

/// Nearest cell of `targets` to `p`: L-infinity, then squared distance, then coordinates.
fn nearest(p: Point, targets: &BTreeSet<Point>, allowed: &dyn Fn(Point) -> bool) -> Option<Point> {
    if targets.contains(&p) && allowed(p) {
        return Some(p);
    }
    let bb = Rect::bounding(&targets.iter().copied().collect::<Vec<_>>());
    let reach = [Point::new(bb.x0, bb.y0), Point::new(bb.x1, bb.y1)].iter().map(|q| q.linf(p)).max().unwrap_or(0) + 1;
    for d in 1..=reach {
        let mut best: Option<(i64, Point)> = None;
        for q in Rect::new(p.x - d, p.y - d, p.x + d + 1, p.y + d + 1).points() {
            if q.linf(p) == d && targets.contains(&q) && allowed(q) {
                let k = (q.dist2(p), q);
                if best.is_none_or(|b| k < b) {
                    best = Some(k);
                }
            }
        }
        if let Some((_, q)) = best {
            return Some(q);
        }
    }
    None
}

/// Base map between domains: identity on the overlap, nearest target cell elsewhere.
pub fn base_map(source: &[Point], target: &[Point]) -> BTreeMap<Point, Point> {
    let tset: BTreeSet<Point> = target.iter().copied().collect();
    source.iter().map(|&p| (p, nearest(p, &tset, &|_| true).expect("nonempty target"))).collect()
}

/// Member of the translation family with offset `h` in `[1, h_range]^2`: bad sets `t`
/// of the source move by `h - (1,1)`, bad sets `tp` of the target pull back by the same
/// vector, everything else follows the base map, kept off the reserved target cells.
#[allow(clippy::too_many_arguments)]
pub fn translation_family(
    source: &[Point],
    target: &[Point],
    t: &[Vec<Point>],
    tp: &[Vec<Point>],
    h: Point,
    h_range: i64,
    size_cap: u64,
) -> Result<CellCorrespondence, EmbedError> {
    if h.x < 1 || h.y < 1 || h.x > h_range || h.y > h_range {
        return Err(EmbedError::OffsetOutOfRange(h));
    }
    let total = |s: &[Vec<Point>]| s.iter().map(|v| v.len() as u64).sum::<u64>();
    if total(t) > size_cap || total(tp) > size_cap {
        return Err(EmbedError::SizeBound);
    }
    let o = Point::new(h.x - 1, h.y - 1);
    let sset: BTreeSet<Point> = source.iter().copied().collect();
    let tset: BTreeSet<Point> = target.iter().copied().collect();
    let images: Vec<Vec<Point>> = t.iter().map(|s| s.iter().map(|p| p.add(o)).collect()).collect();
    let pre: Vec<Vec<Point>> = tp.iter().map(|s| s.iter().map(|p| p.sub(o)).collect()).collect();
    if images.iter().flatten().any(|p| !tset.contains(p)) || pre.iter().flatten().any(|p| !sset.contains(p)) {
        return Err(EmbedError::TargetOutside);
    }
    // Target-side sets must be pairwise disjoint and non-neighbouring.
    let placed: Vec<&Vec<Point>> = images.iter().chain(tp.iter()).collect();
    for i in 0..placed.len() {
        for k in i + 1..placed.len() {
            if set_gap(placed[i], placed[k]) < 1 {
                return Err(EmbedError::TargetOutside);
            }
        }
    }
    let mut map = BTreeMap::new();
    let mut reserved = BTreeSet::new();
    for (s, img) in t.iter().zip(&images) {
        for (a, b) in s.iter().zip(img) {
            map.insert(*a, *b);
            reserved.insert(*b);
        }
    }
    for (p, s) in pre.iter().zip(tp) {
        for (a, b) in p.iter().zip(s) {
            if map.contains_key(a) {
                return Err(EmbedError::TargetOutside);
            }
            map.insert(*a, *b);
            reserved.insert(*b);
        }
    }
    for &c in source {
        if map.contains_key(&c) {
            continue;
        }
        let q = nearest(c, &tset, &|q| !reserved.contains(&q)).ok_or(EmbedError::TargetOutside)?;
        map.insert(c, q);
    }
    let forward = t.iter().cloned().zip(images).collect();
    let backward = pre.into_iter().zip(tp.iter().cloned()).collect();
    Ok(CellCorrespondence::finish(0, source.to_vec(), target.to_vec(), map, forward, backward))
}

/// Translation family inside an unperturbed multi-cell: each `t_i` meeting `interior` is
/// first pushed (by the same vector for every `h`) far enough in that all its translates
/// by `h - (1,1)`, `h` in `[1, h_range]^2`, stay inside `interior`.
pub fn interior_translation_family(
    source: &[Point],
    interior: &[Point],
    t: &[Vec<Point>],
    h: Point,
    h_range: i64,
) -> Result<CellCorrespondence, EmbedError> {
    if h.x < 1 || h.y < 1 || h.x > h_range || h.y > h_range {
        return Err(EmbedError::OffsetOutOfRange(h));
    }
    let iset: BTreeSet<Point> = interior.iter().copied().collect();
    let sset: BTreeSet<Point> = source.iter().copied().collect();
    let ib = Rect::bounding(interior);
    let o = Point::new(h.x - 1, h.y - 1);
    let mut map: BTreeMap<Point, Point> = BTreeMap::new();
    let mut forward = Vec::new();
    for s in t {
        let meets = s.iter().any(|p| iset.contains(p));
        let push = if meets {
            let bb = Rect::bounding(s);
            let fit = |lo: i64, hi: i64, ilo: i64, ihi: i64| -> Result<i64, EmbedError> {
                // need lo + d >= ilo and hi - 1 + d + (h_range - 1) < ihi
                let d_min = ilo - lo;
                let d_max = ihi - hi - (h_range - 1);
                if d_min > d_max {
                    return Err(EmbedError::MarginViolated);
                }
                Ok(0i64.clamp(d_min, d_max))
            };
            Point::new(fit(bb.x0, bb.x1, ib.x0, ib.x1)?, fit(bb.y0, bb.y1, ib.y0, ib.y1)?)
        } else {
            Point::new(0, 0)
        };
        let img: Vec<Point> = s.iter().map(|p| p.add(push).add(o)).collect();
        if meets && img.iter().any(|p| !iset.contains(p)) {
            return Err(EmbedError::MarginViolated);
        }
        if img.iter().any(|p| !sset.contains(p)) {
            return Err(EmbedError::TargetOutside);
        }
        for (a, b) in s.iter().zip(&img) {
            map.insert(*a, *b);
        }
        forward.push((s.clone(), img));
    }
    let reserved: BTreeSet<Point> = forward.iter().flat_map(|(_, i)| i.iter().copied()).collect();
    for &c in source {
        if !map.contains_key(&c) {
            let q = nearest(c, &sset, &|q| !reserved.contains(&q)).ok_or(EmbedError::TargetOutside)?;
            map.insert(c, q);
        }
    }
    Ok(CellCorrespondence::finish(0, source.to_vec(), source.to_vec(), map, forward, Vec::new()))
}

/// Checks injectivity, value preservation and the Lipschitz bound (Euclidean) over all pairs.
pub fn verify_embedding(map: &EmbeddingMap, x: &BitField, y: &BitField) -> Result<bool, EmbedError> {
    let mut seen = BTreeSet::new();
    for &(v, w) in &map.phi {
        let yb = y.get(w).ok_or(EmbedError::ImageOutside(w))?;
        let Some(xb) = x.get(v) else { return Ok(false) };
        if xb != yb || !seen.insert(w) {
            return Ok(false);
        }
    }
    let int_m = libm::trunc(map.m) == map.m && map.m >= 0.0 && map.m < 1e9;
    let m2i = (map.m as i128) * (map.m as i128);
    let m2f = map.m * map.m;
    for (i, &(v1, w1)) in map.phi.iter().enumerate() {
        for &(v2, w2) in &map.phi[i + 1..] {
            let dv = v1.dist2(v2) as i128;
            let dw = w1.dist2(w2) as i128;
            let ok = if int_m { dw <= m2i * dv } else { dw as f64 <= m2f * dv as f64 };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Evidence that X over `u` embeds into Y over `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub level: u32,
    pub index_set: Vec<Point>,
    /// Winning offset of the translation family (level >= 1).
    pub h: Option<Point>,
    pub correspondence: CellCorrespondence,
    pub map: EmbeddingMap,
}

/// Sites of Y block `v` ordered by distance to the block centre, then coordinates.
fn centre_order(v: Point, m0: u32) -> Vec<Point> {
    let r = y_block_rect(v, m0);
    let c2 = Point::new(r.x0 + r.x1 - 1, r.y0 + r.y1 - 1);
    let mut s: Vec<Point> = r.points().collect();
    s.sort_by_key(|p| {
        let d = Point::new(2 * p.x, 2 * p.y).sub(c2);
        (d.x * d.x + d.y * d.y, *p)
    });
    s
}

/// Sends each X site (level-0 X cell) to an unused site of equal value in the Y block
/// it corresponds to, nearest to the block centre first.
fn flatten(corr: &BTreeMap<Point, Point>, x: &BitField, y: &BitField, m0: u32) -> Option<Vec<(Point, Point)>> {
    let mut used: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
    let mut phi = Vec::with_capacity(corr.len());
    for (&c, &v) in corr {
        let b = x.get(c)?;
        let taken = used.entry(v).or_default();
        let site = centre_order(v, m0).into_iter().find(|s| !taken.contains(s) && y.get(*s) == Some(b))?;
        taken.insert(site);
        phi.push((c, site));
    }
    Some(phi)
}

fn check_pair(x: &Hierarchy, y: &Hierarchy, j: u32) -> Result<(), EmbedError> {
    if x.family != Family::X || y.family != Family::Y {
        return Err(EmbedError::WrongFamilies);
    }
    if x.levels.len() <= j as usize || y.levels.len() <= j as usize {
        return Err(EmbedError::NotBuilt);
    }
    Ok(())
}

/// Level-0 cellwise test and flattening.
fn embeds_level0(x: &Hierarchy, y: &Hierarchy, u: &[Point]) -> Result<Option<Witness>, EmbedError> {
    for &p in u {
        let (Some(&a), Some(&b)) = (x.cells0.get(p), y.cells0.get(p)) else { return Err(EmbedError::NotBuilt) };
        if !cells_embed(a, b) {
            return Ok(None);
        }
    }
    let map: BTreeMap<Point, Point> = u.iter().map(|&p| (p, p)).collect();
    let Some(phi) = flatten(&map, &x.field, &y.field, y.params.m0) else { return Ok(None) };
    let em = EmbeddingMap { phi, m: y.params.lipschitz };
    if !verify_embedding(&em, &x.field, &y.field)? {
        return Ok(None);
    }
    let corr = CellCorrespondence::finish(0, u.to_vec(), u.to_vec(), map, Vec::new(), Vec::new());
    Ok(Some(Witness { level: 0, index_set: u.to_vec(), h: None, correspondence: corr, map: em }))
}

/// Whether `u` is a union of uncensored lattice blocks of `level`.
pub fn valid_union(level: &Level, u: &[Point]) -> bool {
    let set: BTreeSet<Point> = u.iter().copied().collect();
    u.iter().all(|&p| match level.block_at(p) {
        Some(b) => !b.censored && b.lattice_block.animal.sites().iter().all(|q| set.contains(q)),
        None => false,
    })
}

fn members(level: &Level, u: &[Point]) -> Vec<Point> {
    let mut ids: Vec<u32> = u.iter().map(|&p| level.block_of[p]).collect();
    ids.sort();
    ids.dedup();
    let mut out: Vec<Point> = ids.iter().flat_map(|&b| level.blocks[b as usize].member_cells.iter().copied()).collect();
    out.sort();
    out
}

/// Bad level-(j-1) components (as cell lists) meeting `cells`.
fn bad_sets(lower: &Level, cells: &[Point]) -> Vec<Vec<Point>> {
    let mut ids = BTreeSet::new();
    for &p in cells {
        if let Some(&c) = lower.comp_of.get(p) {
            if lower.components[c as usize].status.is_bad() {
                ids.insert(c);
            }
        }
    }
    ids.iter().map(|&c| lower.components[c as usize].animal.sites().to_vec()).collect()
}

/// Searches for an embedding of X over the level-`j` index set `u` into Y over `u`.
///
/// Level 0 is the exact cellwise rule. At level 1 both sides must be valid (a union of
/// uncensored lattice blocks); offsets `h` are tried in lexicographic order and the first
/// whose correspondence matches every bad set cellwise, stays within the capacity of
/// each good Y cell, and flattens to a verified site map is returned.
pub fn embeds_level(x: &Hierarchy, y: &Hierarchy, u: &[Point], j: u32) -> Result<Option<Witness>, EmbedError> {
    check_pair(x, y, j)?;
    let mut u = u.to_vec();
    u.sort();
    u.dedup();
    if j == 0 {
        return embeds_level0(x, y, &u);
    }
    if j > 1 {
        return Err(EmbedError::NotBuilt);
    }
    let (xl, yl) = (x.level(1), y.level(1));
    if !valid_union(xl, &u) || !valid_union(yl, &u) {
        return Ok(None);
    }
    let src = members(xl, &u);
    let dst = members(yl, &u);
    let t = bad_sets(x.level(0), &src);
    let tp = bad_sets(y.level(0), &dst);
    let g = y.geometry(1).ok_or(EmbedError::NotBuilt)?;
    let params = &y.params;
    let cap = params.v0 * params.k0;
    for h1 in 1..=g.h_range {
        for h2 in 1..=g.h_range {
            let h = Point::new(h1, h2);
            let Ok(corr) = translation_family(&src, &dst, &t, &tp, h, g.h_range, cap) else { continue };
            if let Some(w) = realize(x, y, &u, corr, h, params) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn realize(x: &Hierarchy, y: &Hierarchy, u: &[Point], mut corr: CellCorrespondence, h: Point, params: &ParameterSet) -> Option<Witness> {
    let cell = |hh: &Hierarchy, p: Point| hh.cells0.get(p).copied();
    for (s, img) in corr.forward.iter().chain(corr.backward.iter()) {
        for (a, b) in s.iter().zip(img) {
            if !cells_embed(cell(x, *a)?, cell(y, *b)?) {
                return None;
            }
        }
    }
    let reserved: BTreeSet<Point> = corr.forward.iter().chain(corr.backward.iter()).flat_map(|(_, i)| i.iter().copied()).collect();
    let matched: BTreeSet<Point> = corr.forward.iter().chain(corr.backward.iter()).flat_map(|(s, _)| s.iter().copied()).collect();
    let tset: BTreeSet<Point> = corr.target.iter().copied().collect();
    let cap = params.good_threshold() as usize;
    // Load per (target cell, bit); free cells must land on good Y cells with spare capacity.
    let mut load: BTreeMap<(Point, u8), usize> = BTreeMap::new();
    let keys: Vec<Point> = corr.map.keys().copied().collect();
    for c in keys {
        if matched.contains(&c) {
            continue;
        }
        let bit = match cell(x, c)? {
            Cell0::Bit(b) => b,
            Cell0::Class(_) => return None,
        };
        let fits = |q: Point, load: &BTreeMap<(Point, u8), usize>| {
            !reserved.contains(&q)
                && y.level(0).component_at(q).is_some_and(|k| k.status == Status::GoodSingleton)
                && load.get(&(q, bit)).copied().unwrap_or(0) < cap
        };
        let mut q = corr.map[&c];
        if !fits(q, &load) {
            q = nearest_fit(q, &tset, &|p| fits(p, &load))?;
            corr.map.insert(c, q);
        }
        *load.entry((q, bit)).or_insert(0) += 1;
    }
    corr.level = 1;
    corr.displacement_budget = corr.map.iter().map(|(a, b)| a.linf(*b)).max().unwrap_or(0);
    let phi = flatten(&corr.map, &x.field, &y.field, params.m0)?;
    let em = EmbeddingMap { phi, m: params.lipschitz };
    if !verify_embedding(&em, &x.field, &y.field).ok()? {
        return None;
    }
    Some(Witness { level: 1, index_set: u.to_vec(), h: Some(h), correspondence: corr, map: em })
}

fn nearest_fit(p: Point, targets: &BTreeSet<Point>, ok: &dyn Fn(Point) -> bool) -> Option<Point> {
    nearest(p, targets, ok)
}

/// Cells of a component or block animal, for callers holding one.
pub fn index_set(a: &LatticeAnimal) -> Vec<Point> {
    a.sites().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(family: Family, w: u32, h: u32, bits: &[u8]) -> BitField {
        BitField::from_bits(family, Point::new(0, 0), w, h, 0, bits.to_vec()).unwrap()
    }

    #[test]
    fn identity_on_equal_fields() {
        let f = field(Family::X, 3, 3, &[0, 1, 1, 0, 0, 1, 1, 1, 0]);
        let g = BitField { family: Family::Y, ..f.clone() };
        let phi = Rect::new(0, 0, 3, 3).points().map(|p| (p, p)).collect();
        assert!(verify_embedding(&EmbeddingMap { phi, m: 1.0 }, &f, &g).unwrap());
    }

    #[test]
    fn collision_is_rejected() {
        let f = field(Family::X, 2, 1, &[0, 0]);
        let g = field(Family::Y, 2, 1, &[0, 0]);
        let m = EmbeddingMap { phi: alloc::vec![(Point::new(0, 0), Point::new(0, 0)), (Point::new(1, 0), Point::new(0, 0))], m: 5.0 };
        assert!(!verify_embedding(&m, &f, &g).unwrap());
    }

    #[test]
    fn stretched_pair_is_rejected() {
        let f = field(Family::X, 2, 1, &[0, 0]);
        let g = field(Family::Y, 4, 1, &[0, 0, 0, 0]);
        // distance 1 -> 3 with M = 2: 9 > 4.
        let m = EmbeddingMap { phi: alloc::vec![(Point::new(0, 0), Point::new(0, 0)), (Point::new(1, 0), Point::new(3, 0))], m: 2.0 };
        assert!(!verify_embedding(&m, &f, &g).unwrap());
        let ok = EmbeddingMap { phi: alloc::vec![(Point::new(0, 0), Point::new(0, 0)), (Point::new(1, 0), Point::new(2, 0))], m: 2.0 };
        assert!(verify_embedding(&ok, &f, &g).unwrap());
    }

    #[test]
    fn translation_law() {
        let dom: Vec<Point> = Rect::new(0, 0, 12, 12).points().collect();
        let t = alloc::vec![alloc::vec![Point::new(4, 4), Point::new(5, 4)]];
        let a = translation_family(&dom, &dom, &t, &[], Point::new(1, 1), 4, 4).unwrap();
        let b = translation_family(&dom, &dom, &t, &[], Point::new(2, 1), 4, 4).unwrap();
        for (p, q) in a.forward[0].1.iter().zip(&b.forward[0].1) {
            assert_eq!(q.sub(*p), Point::new(1, 0));
        }
        assert!(a.is_identity());
    }

    #[test]
    fn star_identity_when_variants_agree() {
        let dom: Vec<Point> = Rect::new(0, 0, 10, 10).points().collect();
        let t = alloc::vec![alloc::vec![Point::new(5, 5)]];
        let v = alloc::vec![alloc::vec![Point::new(5, 5), Point::new(5, 6)]];
        let c = star_canonical(&dom, &t, &v, &v, 1).unwrap();
        assert!(c.is_identity());
        assert_eq!(c.displacement_budget, 0);
    }
}
