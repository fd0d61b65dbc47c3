//! Hierarchy and witness dumps as JSON lines (schema `lipembed-dump/1`).
//!
//! Hierarchy records, in order:
//! - `hierarchy`: family, field header, depth;
//! - per level, a `level` record with the index window and counts, then `cell`,
//!   `block` and `component` records, then (levels >= 1) `edge` records for joined
//!   shared buffers.
//!
//! Level-0 `cell`, `block` and `component` records are written only for bad cells
//! (every good level-0 cell is its own good singleton, counted in the `level` record).
//! From level 1 on every cell, block and component is written. Coordinates of a level-j
//! record are level-j cell indices, except `members` and `domain`, which are in
//! level-(j-1) cells.

use lipembed_core::embed::Witness;
use lipembed_core::hierarchy::{Hierarchy, Level, Orient};
use lipembed_core::{Point, Rect};
use serde_json::{json, Value};

use crate::format::field_header;
use crate::report::s_value_text;

pub const DUMP_SCHEMA: &str = "lipembed-dump/1";

fn pt(p: Point) -> Value {
    json!([p.x, p.y])
}

fn pts(ps: &[Point]) -> Value {
    Value::Array(ps.iter().map(|&p| pt(p)).collect())
}

fn rect(r: Rect) -> Value {
    json!([r.x0, r.y0, r.x1, r.y1])
}

/// Whether a level's cell is written to the dump (and drawn as a cell by the renderer).
pub fn cell_listed(l: &Level, p: Point) -> bool {
    l.level > 0 || l.is_bad_cell(p) == Some(true)
}

pub fn hierarchy_records(h: &Hierarchy) -> Vec<Value> {
    let mut out = vec![json!({"schema": DUMP_SCHEMA, "kind": "hierarchy", "family": h.family.letter().to_string(), "field": field_header(&h.field), "depth": h.depth()})];
    for l in &h.levels {
        let j = l.level;
        let bad_blocks = l.blocks.iter().filter(|b| !b.good).count();
        let bad_comps = l.components.iter().filter(|c| c.status.is_bad()).count();
        out.push(json!({
            "kind": "level", "level": j, "window": rect(l.window),
            "blocks": l.blocks.len(), "bad_blocks": bad_blocks,
            "components": l.components.len(), "bad_components": bad_comps,
        }));
        for p in l.window.points() {
            if !cell_listed(l, p) {
                continue;
            }
            let b = l.block_of[p];
            let c = l.comp_of[p];
            let mut rec = json!({"kind": "cell", "level": j, "at": pt(p), "block": b, "component": c, "good": l.blocks[b as usize].good});
            if let Some(st) = &l.structure {
                let g = &st.geometry;
                let r = g.ratio;
                rec["region"] = rect(Rect::new(p.x * r, p.y * r, (p.x + 1) * r, (p.y + 1) * r));
            }
            out.push(rec);
        }
        for (i, b) in l.blocks.iter().enumerate() {
            if j == 0 && b.good {
                continue;
            }
            let mut rec = json!({
                "kind": "block", "level": j, "id": i, "animal": pts(b.lattice_block.animal.sites()),
                "good": b.good, "censored": b.censored, "bad_count": b.bad_count, "bad_size": b.bad_size,
            });
            if j > 0 {
                rec["members"] = json!(b.member_cells.len());
                rec["domain"] = rect(Rect::bounding(&b.member_cells));
            }
            out.push(rec);
        }
        for (i, c) in l.components.iter().enumerate() {
            if j == 0 && !c.status.is_bad() {
                continue;
            }
            out.push(json!({
                "kind": "component", "level": j, "id": i, "animal": pts(c.animal.sites()), "blocks": c.blocks,
                "status": c.status.as_str(), "censored": c.censored, "bad_n": c.bad_summary.n, "bad_k": c.bad_summary.k,
                "s_value": c.s_value.as_ref().map(s_value_text),
            }));
        }
        if let Some(st) = &l.structure {
            for (b, e) in &st.edges {
                if !e.joined() {
                    continue;
                }
                out.push(json!({
                    "kind": "edge", "level": j, "cell": pt(b.cell), "orient": match b.orient { Orient::H => "H", Orient::V => "V" },
                    "conjoined": e.conjoined, "forced": e.forced, "uncertain": e.uncertain, "bad_cells": e.bad_cells,
                }));
            }
        }
    }
    out
}

pub fn to_jsonl(records: &[Value]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

pub fn hierarchy_dump(h: &Hierarchy) -> String {
    to_jsonl(&hierarchy_records(h))
}

/// One witness: matched cell pairs and offsets per level, then the site map (X site,
/// Y site) in field coordinates.
pub fn witness_record(w: &Witness, trial: Option<u64>) -> Value {
    let c = &w.correspondence;
    let sets = |v: &[(Vec<Point>, Vec<Point>)]| Value::Array(v.iter().map(|(a, b)| json!([pts(a), pts(b)])).collect());
    json!({
        "schema": DUMP_SCHEMA, "kind": "witness", "trial": trial,
        "level": w.level, "index_set": pts(&w.index_set),
        "levels": [{
            "level": c.level,
            "offset": w.h.map(pt),
            "pairs": Value::Array(c.map.iter().map(|(a, b)| json!([a.x, a.y, b.x, b.y])).collect()),
            "forward": sets(&c.forward), "backward": sets(&c.backward),
            "displacement": c.displacement_budget,
        }],
        "m": w.map.m,
        "sites": Value::Array(w.map.phi.iter().map(|(a, b)| json!([a.x, a.y, b.x, b.y])).collect()),
    })
}
