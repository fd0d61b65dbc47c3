//! SVG drawings of one hierarchy level. Drawing units are level-(j-1) cells (level-0
//! cells for level 0), y pointing up.
//!
//! Element classes: `cell` (one per cell record of the dump at that level), `bad0`
//! (bad cells one level down), `buffer` and `conjoined` (shared buffer zones), `curve`
//! (block boundary curves).

use std::fmt::Write;

use lipembed_core::hierarchy::{buffer_rect, curve_of, Hierarchy};
use lipembed_core::Rect;

use crate::dump::cell_listed;
use crate::error::{Error, Result};

const TARGET_PX: i64 = 960;

struct Canvas {
    view: Rect,
    px: i64,
    out: String,
}

impl Canvas {
    fn x(&self, x: i64) -> i64 {
        (x - self.view.x0) * self.px
    }
    fn y(&self, y: i64) -> i64 {
        (self.view.y1 - y) * self.px
    }
    fn rect(&mut self, class: &str, r: Rect, fill: &str) {
        let _ = writeln!(
            self.out,
            r#"<rect class="{class}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            self.x(r.x0),
            self.y(r.y1),
            r.width() * self.px,
            r.height() * self.px
        );
    }
}

fn fill_for(good: bool, censored: bool) -> &'static str {
    match (good, censored) {
        (_, true) => "#dddddd",
        (true, false) => "#e8f4e8",
        (false, false) => "#f6c28b",
    }
}

pub fn render_level(h: &Hierarchy, j: u32) -> Result<String> {
    let l = h.levels.get(j as usize).ok_or_else(|| Error::Precondition(format!("level {j} not built (depth {})", h.depth())))?;
    let (view, r) = match &l.structure {
        Some(st) => {
            let r = st.geometry.ratio;
            (h.level(j - 1).window, r)
        }
        None => (l.window, 1),
    };
    let px = (TARGET_PX / view.width().max(view.height())).max(1);
    let mut c = Canvas { view, px, out: String::new() };
    let (w, ht) = (view.width() * px, view.height() * px);
    let _ = writeln!(c.out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(c.out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{ht}" viewBox="0 0 {w} {ht}" data-level="{j}" data-family="{}">"#, h.family);
    let _ = writeln!(c.out, r##"<rect class="background" x="0" y="0" width="{w}" height="{ht}" fill="#ffffff"/>"##);
    c.out.push_str("<g id=\"cells\" stroke=\"#555555\" stroke-width=\"1\">\n");
    for p in l.window.points() {
        if !cell_listed(l, p) {
            continue;
        }
        let b = &l.blocks[l.block_of[p] as usize];
        let bad_comp = l.components[l.comp_of[p] as usize].status.is_bad();
        c.rect("cell", Rect::new(p.x * r, p.y * r, (p.x + 1) * r, (p.y + 1) * r), fill_for(!bad_comp && b.good, b.censored));
    }
    c.out.push_str("</g>\n");
    if let Some(st) = &l.structure {
        let g = &st.geometry;
        c.out.push_str("<g id=\"buffers\" fill-opacity=\"0.35\">\n");
        for (b, e) in &st.edges {
            let br = buffer_rect(g, *b).intersect(&view);
            if br.is_empty() {
                continue;
            }
            if e.joined() {
                c.rect("conjoined", br, "#7b68ee");
            } else {
                c.rect("buffer", br, "#add8e6");
            }
        }
        c.out.push_str("</g>\n");
        let lower = h.level(j - 1);
        c.out.push_str("<g id=\"bad\">\n");
        for q in lower.window.points() {
            if lower.is_bad_cell(q) == Some(true) {
                c.rect("bad0", Rect::new(q.x, q.y, q.x + 1, q.y + 1), "#d62728");
            }
        }
        c.out.push_str("</g>\n");
        c.out.push_str("<g id=\"curves\" fill=\"none\" stroke=\"#1f3b8c\" stroke-width=\"2\">\n");
        for b in &l.blocks {
            let curve = curve_of(&b.lattice_block.animal, g, &st.curves);
            let mut d = String::new();
            for s in &curve.polyline {
                let _ = write!(d, "M{} {}L{} {}", c.x(s.a.x), c.y(s.a.y), c.x(s.b.x), c.y(s.b.y));
            }
            let _ = writeln!(c.out, r#"<path class="curve" d="{d}"/>"#);
        }
        c.out.push_str("</g>\n");
    }
    c.out.push_str("</svg>\n");
    Ok(c.out)
}

/// Number of `cell` elements in an SVG produced by [`render_level`].
pub fn count_cells(svg: &str) -> usize {
    svg.matches(r#"class="cell""#).count()
}

