//! Exhaustive search for M-Lipschitz value-preserving injections between small windows.
//!
//! Backtracking with forward checking. X sites are assigned in spiral order from the
//! window centre; candidates are tried nearest-first to the centre-aligned position. After
//! each assignment every unassigned site drops the candidates that collide with it or sit
//! too far from it for the Lipschitz bound.

use alloc::vec::Vec;
use core::fmt;

use crate::embed::EmbeddingMap;
use crate::fields::BitField;
use crate::lattice::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Decide,
    Count,
    Enumerate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Decide => "decide",
            Mode::Count => "count",
            Mode::Enumerate => "enumerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub x: BitField,
    pub y: BitField,
    pub m: f64,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_x_sites: usize,
    pub max_y_sites: usize,
    pub node_budget: u64,
    /// Maps kept in enumerate mode.
    pub max_maps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_x_sites: 16, max_y_sites: 1024, node_budget: 50_000_000, max_maps: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    XTooLarge { sites: usize, cap: usize },
    YTooLarge { sites: usize, cap: usize },
    BudgetExhausted { nodes: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::XTooLarge { sites, cap } => write!(f, "X window has {sites} sites, cap {cap}"),
            OracleError::YTooLarge { sites, cap } => write!(f, "Y window has {sites} sites, cap {cap}"),
            OracleError::BudgetExhausted { nodes } => write!(f, "node budget exhausted after {nodes} nodes"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub mode: Mode,
    /// Whether some embedding exists.
    pub exists: bool,
    /// Total number of embeddings (count and enumerate modes).
    pub count: Option<u64>,
    /// First map found (decide), or up to `max_maps` maps (enumerate).
    pub maps: Vec<EmbeddingMap>,
    pub nodes: u64,
}

/// `d2(image) <= M^2 d2(source)`; integer when `M` is integral.
#[derive(Clone, Copy)]
struct Bound {
    int: Option<i128>,
    f: f64,
}

impl Bound {
    fn new(m: f64) -> Self {
        let int = (libm::trunc(m) == m && m >= 0.0 && m < 1e9).then(|| (m as i128) * (m as i128));
        Bound { int, f: m * m }
    }
    fn ok(self, dw: i64, dv: i64) -> bool {
        match self.int {
            Some(m2) => (dw as i128) <= m2 * dv as i128,
            None => dw as f64 <= self.f * dv as f64,
        }
    }
}

/// X sites ordered ring by ring (L-infinity) from the centre, each ring by angle.
pub fn spiral_order(x: &BitField) -> Vec<Point> {
    let r = x.rect();
    // doubled coordinates keep the centre on the lattice
    let c = Point::new(r.x0 + r.x1 - 1, r.y0 + r.y1 - 1);
    let mut pts: Vec<Point> = r.points().collect();
    pts.sort_by(|a, b| {
        let da = Point::new(2 * a.x, 2 * a.y).sub(c);
        let db = Point::new(2 * b.x, 2 * b.y).sub(c);
        let ka = (da.x.abs().max(da.y.abs()), libm::atan2(da.y as f64, da.x as f64));
        let kb = (db.x.abs().max(db.y.abs()), libm::atan2(db.y as f64, db.x as f64));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(b))
    });
    pts
}

struct Search<'a> {
    xs: Vec<Point>,
    ys: &'a [Point],
    bound: Bound,
    limits: Limits,
    mode: Mode,
    nodes: u64,
    count: u64,
    maps: Vec<EmbeddingMap>,
    m: f64,
    assign: Vec<u32>,
}

impl Search<'_> {
    /// Returns true to stop the search.
    fn go(&mut self, depth: usize, domains: &[Vec<u32>]) -> Result<bool, OracleError> {
        if depth == self.xs.len() {
            self.count += 1;
            if self.mode != Mode::Count && self.maps.len() < self.limits.max_maps {
                let phi = self.xs.iter().zip(&self.assign).map(|(&v, &w)| (v, self.ys[w as usize])).collect();
                self.maps.push(EmbeddingMap { phi, m: self.m });
            }
            return Ok(self.mode == Mode::Decide);
        }
        for &cand in &domains[depth] {
            self.nodes += 1;
            if self.nodes > self.limits.node_budget {
                return Err(OracleError::BudgetExhausted { nodes: self.nodes - 1 });
            }
            let w = self.ys[cand as usize];
            let v = self.xs[depth];
            let mut next: Vec<Vec<u32>> = Vec::with_capacity(domains.len());
            next.extend(domains[..=depth].iter().cloned());
            let mut dead = false;
            for k in depth + 1..self.xs.len() {
                let dv = v.dist2(self.xs[k]);
                let d: Vec<u32> = domains[k].iter().copied().filter(|&c| c != cand && self.bound.ok(w.dist2(self.ys[c as usize]), dv)).collect();
                if d.is_empty() {
                    dead = true;
                    break;
                }
                next.push(d);
            }
            if dead {
                continue;
            }
            self.assign[depth] = cand;
            if self.go(depth + 1, &next)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Runs `inst` in its own mode.
pub fn solve(inst: &Instance, limits: Limits) -> Result<OracleResult, OracleError> {
    let nx = inst.x.bits.len();
    let ny = inst.y.bits.len();
    if nx > limits.max_x_sites {
        return Err(OracleError::XTooLarge { sites: nx, cap: limits.max_x_sites });
    }
    if ny > limits.max_y_sites {
        return Err(OracleError::YTooLarge { sites: ny, cap: limits.max_y_sites });
    }
    let xs = spiral_order(&inst.x);
    let xbits: Vec<u8> = xs.iter().map(|&p| inst.x.bit(p)).collect();
    let ys: Vec<Point> = inst.y.rect().points().collect();
    let (xr, yr) = (inst.x.rect(), inst.y.rect());
    // Centre-aligned placement, in doubled coordinates.
    let shift = Point::new(yr.x0 + yr.x1 - xr.x0 - xr.x1, yr.y0 + yr.y1 - xr.y0 - xr.y1);
    let domains: Vec<Vec<u32>> = xs
        .iter()
        .zip(&xbits)
        .map(|(&v, &b)| {
            let target = Point::new(2 * v.x, 2 * v.y).add(shift);
            let mut d: Vec<u32> = (0..ys.len() as u32).filter(|&i| inst.y.bit(ys[i as usize]) == b).collect();
            d.sort_by_key(|&i| {
                let w = ys[i as usize];
                (Point::new(2 * w.x, 2 * w.y).dist2(target), w)
            });
            d
        })
        .collect();
    let mut s = Search {
        xs,
        ys: &ys,
        bound: Bound::new(inst.m),
        limits,
        mode: inst.mode,
        nodes: 0,
        count: 0,
        maps: Vec::new(),
        m: inst.m,
        assign: alloc::vec![0; nx],
    };
    if !domains.iter().any(|d| d.is_empty()) {
        s.go(0, &domains)?;
    }
    Ok(OracleResult {
        mode: inst.mode,
        exists: s.count > 0,
        count: (inst.mode != Mode::Decide).then_some(s.count),
        maps: s.maps,
        nodes: s.nodes,
    })
}

/// First embedding found, or `None` after exhausting the search.
pub fn find_embedding(x: &BitField, y: &BitField, m: f64, limits: Limits) -> Result<Option<EmbeddingMap>, OracleError> {
    let inst = Instance { x: x.clone(), y: y.clone(), m, mode: Mode::Decide };
    Ok(solve(&inst, limits)?.maps.into_iter().next())
}

/// Exact number of embeddings; budget exhaustion is an error, never a count.
pub fn count_embeddings(x: &BitField, y: &BitField, m: f64, limits: Limits) -> Result<u64, OracleError> {
    let inst = Instance { x: x.clone(), y: y.clone(), m, mode: Mode::Count };
    Ok(solve(&inst, limits)?.count.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::verify_embedding;
    use crate::fields::Family;

    fn f(family: Family, w: u32, h: u32, bits: alloc::vec::Vec<u8>) -> BitField {
        BitField::from_bits(family, Point::new(0, 0), w, h, 0, bits).unwrap()
    }

    #[test]
    fn zeros_into_zeros() {
        let x = f(Family::X, 2, 2, alloc::vec![0; 4]);
        let y = f(Family::Y, 6, 6, alloc::vec![0; 36]);
        let m = find_embedding(&x, &y, 2.0, Limits::default()).unwrap().unwrap();
        assert!(verify_embedding(&m, &x, &y).unwrap());
    }

    #[test]
    fn one_into_zeros_is_impossible() {
        let x = f(Family::X, 2, 2, alloc::vec![0, 1, 0, 0]);
        let y = f(Family::Y, 6, 6, alloc::vec![0; 36]);
        assert!(find_embedding(&x, &y, 2.0, Limits::default()).unwrap().is_none());
    }

    #[test]
    fn single_site_count() {
        let x = f(Family::X, 1, 1, alloc::vec![1]);
        let y = f(Family::Y, 3, 3, alloc::vec![1, 0, 1, 0, 0, 1, 0, 0, 0]);
        assert_eq!(count_embeddings(&x, &y, 0.0, Limits::default()).unwrap(), 3);
    }

    #[test]
    fn budget_is_reported() {
        let x = f(Family::X, 2, 2, alloc::vec![0; 4]);
        let y = f(Family::Y, 6, 6, alloc::vec![0; 36]);
        let lim = Limits { node_budget: 10, ..Limits::default() };
        assert!(matches!(count_embeddings(&x, &y, 3.0, lim), Err(OracleError::BudgetExhausted { .. })));
    }
}
