//! Lattice blocks (edge percolation) and components (closure of the grouping rules).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{Grid, Point, Rect, CLOSE_PACKED};

pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }
    pub fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let p = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = p;
            a = p;
        }
        a
    }
    /// Returns true if two sets were merged. The smaller root wins, so labels are order-free.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }
}

/// A partition of a window into labelled groups; labels are dense and ordered by each
/// group's smallest cell (row-major).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub label: Grid<u32>,
    pub groups: Vec<Vec<Point>>,
}

impl Partition {
    fn from_roots(window: Rect, mut root: impl FnMut(Point) -> u32) -> Partition {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut label = Grid::new(window, 0u32);
        let mut groups: Vec<Vec<Point>> = Vec::new();
        for y in window.y0..window.y1 {
            for x in window.x0..window.x1 {
                let p = Point::new(x, y);
                let r = root(p);
                let id = *remap.entry(r).or_insert_with(|| {
                    groups.push(Vec::new());
                    (groups.len() - 1) as u32
                });
                label.set(p, id);
                groups[id as usize].push(p);
            }
        }
        for g in groups.iter_mut() {
            g.sort();
        }
        Partition { label, groups }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Connected components of the window under the kept edges. `conjoined(u, v)` is asked
/// once per Euclidean pair with `v = u + (1,0)` or `u + (0,1)`, both inside the window.
pub fn form_lattice_blocks(window: Rect, mut conjoined: impl FnMut(Point, Point) -> bool) -> Partition {
    let mut uf = UnionFind::new(window.area() as usize);
    for y in window.y0..window.y1 {
        for x in window.x0..window.x1 {
            let u = Point::new(x, y);
            for d in [Point::new(1, 0), Point::new(0, 1)] {
                let v = u.add(d);
                if window.contains(v) && conjoined(u, v) {
                    uf.union(window.offset(u) as u32, window.offset(v) as u32);
                }
            }
        }
    }
    Partition::from_roots(window, |p| uf.find(window.offset(p) as u32))
}

/// Groups lattice blocks into components: starting from the blocks, repeatedly merge
/// (a) any close-packed neighbour of a bad or multi-cell group unless it is a good
/// singleton block, and (b) the full 2x2 square around any diagonal pair inside a group,
/// until nothing changes. `good[b]` is the goodness of block `b`.
pub fn form_components(blocks: &Partition, good: &[bool]) -> Partition {
    let window = blocks.label.rect;
    let nb = blocks.groups.len();
    let mut uf = UnionFind::new(nb);
    let good_singleton: Vec<bool> = (0..nb).map(|b| good[b] && blocks.groups[b].len() == 1).collect();
    loop {
        let mut changed = false;
        // Group state by root: number of cells and whether it is still a good singleton.
        let mut cells = vec![0usize; nb];
        let mut any_bad = vec![false; nb];
        for b in 0..nb {
            let r = uf.find(b as u32) as usize;
            cells[r] += blocks.groups[b].len();
            any_bad[r] |= !good[b];
        }
        for y in window.y0..window.y1 {
            for x in window.x0..window.x1 {
                let u = Point::new(x, y);
                let bu = blocks.label[u];
                let ru = uf.find(bu) as usize;
                if !(any_bad[ru] || cells[ru] > 1) {
                    continue;
                }
                for d in CLOSE_PACKED {
                    let v = u.add(d);
                    if !window.contains(v) {
                        continue;
                    }
                    let bv = blocks.label[v];
                    if !good_singleton[bv as usize] && uf.union(bu, bv) {
                        changed = true;
                    }
                }
                for d in [Point::new(1, 1), Point::new(1, -1)] {
                    let v = u.add(d);
                    if !window.contains(v) || uf.find(blocks.label[v]) != uf.find(bu) {
                        continue;
                    }
                    for w in [Point::new(v.x, u.y), Point::new(u.x, v.y)] {
                        if window.contains(w) && uf.union(bu, blocks.label[w]) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Partition::from_roots(window, |p| uf.find(blocks.label[p]))
}

/// Greedy subset of `bad` cells, pairwise not close-packed neighbours, scanned in sorted order.
pub fn non_neighbouring_subset(bad: &[Point]) -> Vec<Point> {
    let mut sorted = bad.to_vec();
    sorted.sort();
    let mut out: Vec<Point> = Vec::new();
    for p in sorted {
        if out.iter().all(|q| q.linf(p) > 1) {
            out.push(p);
        }
    }
    out
}
