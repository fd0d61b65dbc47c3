//! Independent re-check of a built level against its structural invariants.
//!
//! Nothing here reuses the builder's union-find or ownership code: blocks are recomputed
//! by breadth-first search over the stored edge states, and member sets are compared
//! against the ideal multi-cell geometry directly.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{ideal_blowup_contains, ideal_interior, Bnd, Hierarchy, Status};
use crate::lattice::{Point, Rect, CLOSE_PACKED, EUCLID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Invariant {
    InteriorInMembers,
    MembersInBlowup,
    BoundaryMargin,
    FloodFill,
    ComponentUnion,
    MultiCellHasBad,
    BadRingedByGood,
    DiagonalSquare,
}

impl Invariant {
    pub const ALL: [Invariant; 8] = [
        Invariant::InteriorInMembers,
        Invariant::MembersInBlowup,
        Invariant::BoundaryMargin,
        Invariant::FloodFill,
        Invariant::ComponentUnion,
        Invariant::MultiCellHasBad,
        Invariant::BadRingedByGood,
        Invariant::DiagonalSquare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Invariant::InteriorInMembers => "interior_in_members",
            Invariant::MembersInBlowup => "members_in_blowup",
            Invariant::BoundaryMargin => "boundary_margin",
            Invariant::FloodFill => "flood_fill",
            Invariant::ComponentUnion => "component_union",
            Invariant::MultiCellHasBad => "multicell_has_bad",
            Invariant::BadRingedByGood => "bad_ringed_by_good",
            Invariant::DiagonalSquare => "diagonal_square",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub invariant: Invariant,
    pub at: Point,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.invariant.as_str(), self.at, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub blocks_checked: usize,
    pub components_checked: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
    pub fn count(&self, inv: Invariant) -> usize {
        self.violations.iter().filter(|v| v.invariant == inv).count()
    }
}

fn push(out: &mut Vec<Violation>, invariant: Invariant, at: Point, detail: String) {
    out.push(Violation { invariant, at, detail });
}

/// Checks level `j >= 1` of `h`. Geometric invariants are checked on uncensored blocks
/// (a censored block may be cut by the window); combinatorial ones on the whole window.
pub fn check_level(h: &Hierarchy, j: u32) -> CheckReport {
    let mut rep = CheckReport::default();
    let Some(level) = h.levels.get(j as usize) else { return rep };
    let Some(st) = level.structure.as_ref() else { return rep };
    let lower = &h.levels[j as usize - 1];
    let g = &st.geometry;
    let (r, m) = (g.ratio, g.margin);
    let w = level.window;
    let out = &mut rep.violations;

    // Blocks against a breadth-first search over joined edges.
    let joined = |u: Point, v: Point| st.edges.get(&Bnd::between(u, v)).is_some_and(|e| e.joined());
    let mut seen: BTreeMap<Point, usize> = BTreeMap::new();
    let mut flood: Vec<Vec<Point>> = Vec::new();
    for s in w.points() {
        if seen.contains_key(&s) {
            continue;
        }
        let id = flood.len();
        let mut cells = Vec::new();
        let mut q = VecDeque::from([s]);
        seen.insert(s, id);
        while let Some(u) = q.pop_front() {
            cells.push(u);
            for d in EUCLID {
                let v = u.add(d);
                if w.contains(v) && !seen.contains_key(&v) && joined(u, v) {
                    seen.insert(v, id);
                    q.push_back(v);
                }
            }
        }
        cells.sort();
        flood.push(cells);
    }
    for cells in &flood {
        let b = level.block_at(cells[0]).expect("window cell");
        if b.lattice_block.animal.sites() != cells.as_slice() {
            push(out, Invariant::FloodFill, cells[0], alloc::format!("block has {} cells, flood fill {}", b.lattice_block.size(), cells.len()));
        }
    }

    let region = st.owner.rect;
    for b in &level.blocks {
        let cells = b.lattice_block.animal.sites();
        let hull = Rect::bounding(cells);
        let blow = Rect::new(hull.x0 * r, hull.y0 * r, hull.x1 * r, hull.y1 * r).inflate(m);
        if b.censored || !region.contains_rect(&blow) {
            continue;
        }
        rep.blocks_checked += 1;
        let at = cells[0];
        let members: BTreeSet<Point> = b.member_cells.iter().copied().collect();
        let interior = ideal_interior(cells, r, m);
        if let Some(c) = interior.iter().find(|c| !members.contains(c)) {
            push(out, Invariant::InteriorInMembers, at, alloc::format!("interior cell {c} missing"));
        }
        if let Some(c) = b.member_cells.iter().find(|&&c| !ideal_blowup_contains(cells, r, m, c)) {
            push(out, Invariant::MembersInBlowup, at, alloc::format!("member {c} outside blow-up"));
        }
        // Whole cells between each bad member and the nearest non-member.
        let bm = g.boundary_margin;
        for &c in &b.member_cells {
            if !lower.is_bad_cell(c).unwrap_or(false) {
                continue;
            }
            let near = Rect::new(c.x - bm, c.y - bm, c.x + bm + 1, c.y + bm + 1);
            let miss = near.points().find(|p| !members.contains(p));
            if let Some(o) = miss {
                push(out, Invariant::BoundaryMargin, at, alloc::format!("bad cell {c} within {bm} of non-member {o}"));
                break;
            }
        }
    }

    // Components.
    for (ci, comp) in level.components.iter().enumerate() {
        rep.components_checked += 1;
        let q: BTreeSet<Point> = comp.animal.sites().iter().copied().collect();
        let at = comp.animal.sites()[0];
        let mut has_bad = false;
        for &u in &q {
            let b = level.block_at(u).expect("window cell");
            has_bad |= !b.good;
            if let Some(o) = b.lattice_block.animal.sites().iter().find(|p| !q.contains(p)) {
                push(out, Invariant::ComponentUnion, at, alloc::format!("block cell {o} outside component"));
            }
        }
        if q.len() > 1 && !has_bad {
            push(out, Invariant::MultiCellHasBad, at, alloc::format!("{} cells, no bad block", q.len()));
        }
        if has_bad {
            for &u in &q {
                for d in CLOSE_PACKED {
                    let v = u.add(d);
                    if !w.contains(v) || q.contains(&v) {
                        continue;
                    }
                    let b = level.block_at(v).expect("window cell");
                    if !(b.good && b.lattice_block.size() == 1) {
                        push(out, Invariant::BadRingedByGood, at, alloc::format!("neighbour {v} is not a good singleton"));
                    }
                }
            }
        }
        for &u in &q {
            for d in [Point::new(1, 1), Point::new(1, -1)] {
                let v = u.add(d);
                if !q.contains(&v) {
                    continue;
                }
                for c in [Point::new(v.x, u.y), Point::new(u.x, v.y)] {
                    if w.contains(c) && !q.contains(&c) {
                        push(out, Invariant::DiagonalSquare, at, alloc::format!("{c} missing from square of {u},{v}"));
                    }
                }
            }
        }
        let expect_single = comp.status == Status::GoodSingleton;
        if expect_single && (q.len() != 1 || has_bad) {
            push(out, Invariant::MultiCellHasBad, at, alloc::format!("component {ci} marked good singleton"));
        }
    }
    rep
}
