//! Tables written as CSV and as JSON lines.
//!
//! Schema version 1. Every JSON line carries `"schema": "lipembed-report/1"` and
//! `"table": <name>`, followed by the table's columns in CSV order. Columns per table:
//!
//! | table | columns |
//! |---|---|
//! | `tail` | level, x, v, samples, count, empirical, bound_log10, bound, ratio |
//! | `size` | level, v, samples, count, empirical, bound_log10, bound, ratio |
//! | `good` | level, family, blocks, good, frequency, ci_low, ci_high, target |
//! | `estimate` | family, level, component, size, status, trials, successes, estimate, ci_low, ci_high, seed, exact |
//! | `components` | level, id, size, status, censored, bad_n, bad_k, s_value, anchor_x, anchor_y |
//! | `audit` | name, lhs, rhs, verdict, slack, slack_f64, error_bound |
//!
//! Non-finite floats are written as the strings `inf`, `-inf`, `nan`.

use lipembed_core::hierarchy::{Hierarchy, SValue};
use lipembed_core::params::ConstraintReport;
use lipembed_core::stats::{GoodRow, ProbabilityEstimate, SizeRow, TailRow};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn num(f: f64) -> Value {
    if f.is_finite() {
        Value::from(f)
    } else if f.is_nan() {
        Value::from("nan")
    } else if f > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        o => o.to_string(),
    }
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(csv_cell).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let mut m = Map::new();
            m.insert("schema".into(), Value::from(format!("lipembed-report/{SCHEMA_VERSION}")));
            m.insert("table".into(), Value::from(self.name));
            for (c, v) in self.columns.iter().zip(r) {
                m.insert((*c).into(), v.clone());
            }
            s.push_str(&Value::Object(m).to_string());
            s.push('\n');
        }
        s
    }
}

pub fn tail_table(rows: &[TailRow]) -> Table {
    let mut t = Table::new("tail", &["level", "x", "v", "samples", "count", "empirical", "bound_log10", "bound", "ratio"]);
    for r in rows {
        t.push(vec![r.level.into(), num(r.x), r.v.into(), r.samples.into(), r.count.into(), num(r.empirical), num(r.bound_log10), num(r.bound), num(r.ratio)]);
    }
    t
}

pub fn size_table(rows: &[SizeRow]) -> Table {
    let mut t = Table::new("size", &["level", "v", "samples", "count", "empirical", "bound_log10", "bound", "ratio"]);
    for r in rows {
        t.push(vec![r.level.into(), r.v.into(), r.samples.into(), r.count.into(), num(r.empirical), num(r.bound_log10), num(r.bound), num(r.ratio)]);
    }
    t
}

pub fn good_table(rows: &[GoodRow]) -> Table {
    let mut t = Table::new("good", &["level", "family", "blocks", "good", "frequency", "ci_low", "ci_high", "target"]);
    for r in rows {
        t.push(vec![r.level.into(), r.family.letter().to_string().into(), r.blocks.into(), r.good.into(), num(r.frequency), num(r.ci_low), num(r.ci_high), num(r.target)]);
    }
    t
}

pub fn s_value_text(s: &SValue) -> String {
    match s {
        SValue::Exact(q) => q.to_string(),
        SValue::Estimate { successes, trials, .. } => format!("~{successes}/{trials}"),
    }
}

pub fn estimate_table(h: &Hierarchy, j: u32, comp: usize, e: &ProbabilityEstimate) -> Table {
    let mut t = Table::new(
        "estimate",
        &["family", "level", "component", "size", "status", "trials", "successes", "estimate", "ci_low", "ci_high", "seed", "exact"],
    );
    let c = &h.level(j).components[comp];
    let exact = match &c.s_value {
        Some(SValue::Exact(q)) => Value::from(q.to_string()),
        _ => Value::Null,
    };
    t.push(vec![
        h.family.letter().to_string().into(),
        j.into(),
        (comp as u64).into(),
        (c.size() as u64).into(),
        c.status.as_str().into(),
        e.trials.into(),
        e.successes.into(),
        num(e.estimate),
        num(e.ci_low),
        num(e.ci_high),
        e.seed.into(),
        exact,
    ]);
    t
}

pub fn components_table(h: &Hierarchy) -> Table {
    let mut t = Table::new("components", &["level", "id", "size", "status", "censored", "bad_n", "bad_k", "s_value", "anchor_x", "anchor_y"]);
    for l in &h.levels {
        for (i, c) in l.components.iter().enumerate() {
            let a = c.animal.sites()[0];
            t.push(vec![
                l.level.into(),
                (i as u64).into(),
                (c.size() as u64).into(),
                c.status.as_str().into(),
                c.censored.into(),
                c.bad_summary.n.into(),
                c.bad_summary.k.into(),
                c.s_value.as_ref().map(s_value_text).map(Value::from).unwrap_or(Value::Null),
                a.x.into(),
                a.y.into(),
            ]);
        }
    }
    t
}

pub fn audit_table(r: &ConstraintReport) -> Table {
    let mut t = Table::new("audit", &["name", "lhs", "rhs", "verdict", "slack", "slack_f64", "error_bound"]);
    for row in &r.rows {
        t.push(vec![
            row.name.into(),
            row.lhs.clone().into(),
            row.rhs.clone().into(),
            row.verdict.as_str().into(),
            row.slack.clone().into(),
            num(row.slack_f64),
            num(row.error_bound),
        ]);
    }
    t
}

/// Fixed-width text rendering of the constraint report.
pub fn audit_text(r: &ConstraintReport) -> String {
    let short = |s: &str, w: usize| if s.len() > w { format!("{}...", &s[..w - 3]) } else { s.to_string() };
    let mut s = format!("{:<40} {:>22} {:>22} {:<12} {:>22}\n", "constraint", "lhs", "rhs", "verdict", "slack");
    for row in &r.rows {
        s.push_str(&format!(
            "{:<40} {:>22} {:>22} {:<12} {:>22}\n",
            row.name,
            short(&row.lhs, 22),
            short(&row.rhs, 22),
            row.verdict.as_str(),
            short(&row.slack, 22)
        ));
    }
    s.push_str(&format!("overall: {}\n", if r.overall { "satisfied" } else { "violated" }));
    s
}
