//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest harness
//! so the lines always reach the test log.

use std::collections::BTreeSet;
use std::time::Instant;

use lipembed::ci::clopper_pearson;
use lipembed::config::{parse_profile, REFERENCE_PROFILE};
use lipembed::drive::{self, par_map, survey};
use lipembed::report::{good_table, size_table, tail_table};
use lipembed_core::embed::{embeds_level, verify_embedding};
use lipembed_core::fields::{sample_field, y_block_class, y_block_rect};
use lipembed_core::hierarchy::check::check_level;
use lipembed_core::hierarchy::curves::{self, choose_corner, choose_edge, valid_corner_choices, valid_edge_choices, CornerChoice};
use lipembed_core::hierarchy::{build, select_boundary_curve, site_window_for, Bnd, Cell0, Hierarchy};
use lipembed_core::oracle::{find_embedding, Limits};
use lipembed_core::params::{check_constraints, Verdict};
use lipembed_core::rng::{below, keyed, TAG_MISC};
use lipembed_core::stats::{default_x_grid, exact_s0, good_prob_report, size_report, synthetic_successes, tail_report, ProbabilityEstimate};
use lipembed_core::{BitField, Family, LatticeAnimal, ParameterSet, Point, Rect, Y0Class};
use num_bigint::BigInt;
use num_rational::BigRational;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Y hierarchy with `v` forced-bad cells in a row inside a good checkerboard.
fn y_line(p: &ParameterSet, v: usize) -> Hierarchy {
    let w = Rect::new(0, 0, v as i64 + 6, 7);
    let m0 = p.m0 as i64;
    let sites = Rect::new(0, 0, w.x1 * m0, w.y1 * m0);
    let mut bits: Vec<u8> = sites.points().map(|s| ((s.x + s.y) & 1) as u8).collect();
    for k in 0..v as i64 {
        for s in y_block_rect(Point::new(3 + k, 3), p.m0).points() {
            bits[sites.offset(s)] = (k & 1) as u8;
        }
    }
    let f = BitField::from_bits(Family::Y, Point::new(0, 0), sites.width() as u32, sites.height() as u32, 0, bits).unwrap();
    build(f, p, 0).unwrap()
}

fn criterion_1() -> Outcome {
    let p = ParameterSet::toy();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for v in 1..=3usize {
        let h = y_line(&p, v);
        let c = h.level(0).comp_of[Point::new(3, 3)] as usize;
        let comp = &h.level(0).components[c];
        let exact = 0.5f64.powi(v as i32);
        let n = 20_000;
        let e = drive::estimate_s(&h, 0, c, n, 1000 + v as u64, workers()).unwrap();
        let z = (e.estimate - exact) / sigma(exact, n);
        ok &= comp.size() == v && comp.status.is_bad() && z.abs() <= 3.0;
        parts.push(format!("v={v}: {:.4} vs {exact} ({z:+.2} sd)", e.estimate));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    outcome(ok, format!("{}; {secs:.1} s", parts.join(", ")))
}

/// Probability that a fresh Y block accepts X bit `b`, by listing all `2^(m0^2)` blocks.
fn enumerate_x_success(m0: u32, b: u8) -> BigRational {
    let n = m0 * m0;
    let thr = n.div_ceil(3);
    let mut hits = 0u64;
    for pat in 0u64..(1 << n) {
        let ones = pat.count_ones();
        let zeros = n - ones;
        let good = ones >= thr && zeros >= thr;
        // Ties below the threshold count as One.
        let class_one = ones >= zeros;
        hits += u64::from(good || (b == 1) == class_one);
    }
    BigRational::new(BigInt::from(hits), BigInt::from(1u64 << n))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m0 in [2u32, 3] {
        let p = ParameterSet { m0, lipschitz: 20.0 * m0 as f64, ..ParameterSet::toy() };
        let f = sample_field(77, Family::X, Point::new(0, 0), 8, 8, u64::MAX).unwrap();
        let h = build(f, &p, 0).unwrap();
        for b in [0u8, 1] {
            let exact = exact_s0(Family::X, &[Cell0::Bit(b)], &p);
            let listed = enumerate_x_success(m0, b);
            let c = h.level(0).components.iter().position(|c| !c.censored && h.cells0[c.animal.sites()[0]] == Cell0::Bit(b)).unwrap();
            let n = 20_000;
            let e = drive::estimate_s(&h, 0, c, n, 2000 + m0 as u64 * 10 + b as u64, workers()).unwrap();
            let pf = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            let z = (e.estimate - pf) / sigma(pf, n);
            ok &= exact == listed && z.abs() <= 3.0;
            parts.push(format!("M0={m0} bit {b}: exact {exact} (listing {listed}), estimate {:.4} ({z:+.2} sd)", e.estimate));
        }
    }
    outcome(ok, parts.join(", "))
}

/// `P[ones >= t, zeros >= t]` for `n` fair bits, summed in exact integers.
fn good_block_probability(n: u32, t: u32) -> f64 {
    let mut c: u128 = 1;
    let mut good: u128 = 0;
    for k in 0..=n {
        if k >= t && n - k >= t {
            good += c;
        }
        c = c * (n - k) as u128 / (k + 1) as u128;
    }
    good as f64 / 2f64.powi(n as i32)
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m0 in [3u32, 6, 9] {
        let p = ParameterSet { m0, lipschitz: 20.0 * m0 as f64, ..ParameterSet::toy() };
        let (bw, bh) = (250i64, 400i64);
        let f = sample_field(3000 + m0 as u64, Family::Y, Point::new(0, 0), (bw * m0 as i64) as u32, (bh * m0 as i64) as u32, u64::MAX).unwrap();
        let n = (bw * bh) as u64;
        let good = Rect::new(0, 0, bw, bh).points().filter(|&v| y_block_class(&f, v, &p) == Y0Class::Good).count() as u64;
        let exact = good_block_probability(m0 * m0, (m0 * m0).div_ceil(3));
        let freq = good as f64 / n as f64;
        let z = (freq - exact) / sigma(exact, n);
        ok &= z.abs() <= 3.0;
        parts.push(format!("M0={m0}: {freq:.5} vs {exact:.5} ({z:+.2} sd)"));
    }
    outcome(ok, parts.join(", "))
}

fn random_field(family: Family, w: u32, h: u32, seed: u64) -> BitField {
    let mut r = keyed(seed, TAG_MISC, 11, 0, family as u64);
    BitField::from_bits(family, Point::new(0, 0), w, h, 0, (0..w * h).map(|_| below(&mut r, 2) as u8).collect()).unwrap()
}

/// Whether any injection of X sites into Y sites preserves values and stretches no pair
/// by more than `m` (integer), by plain enumeration.
fn brute_exists(x: &BitField, y: &BitField, m: i64) -> bool {
    let xs: Vec<Point> = x.rect().points().collect();
    let ys: Vec<Point> = y.rect().points().collect();
    fn go(k: usize, xs: &[Point], ys: &[Point], x: &BitField, y: &BitField, m2: i64, img: &mut Vec<Point>) -> bool {
        if k == xs.len() {
            return true;
        }
        for &w in ys {
            if img.contains(&w) || y.bit(w) != x.bit(xs[k]) {
                continue;
            }
            if (0..k).all(|a| img[a].dist2(w) <= m2 * xs[a].dist2(xs[k])) {
                img.push(w);
                if go(k + 1, xs, ys, x, y, m2, img) {
                    return true;
                }
                img.pop();
            }
        }
        false
    }
    go(0, &xs, &ys, x, y, m * m, &mut Vec::new())
}

fn criterion_4() -> Outcome {
    let lim = Limits::default();
    let (mut found, mut verified, mut agree, mut monotone) = (0, 0, 0, 0);
    let ms = [3.0, 2.0, 1.5, 1.0, 0.5];
    let n = 1000u64;
    for s in 0..n {
        let x = random_field(Family::X, 2, 2, s);
        let y = random_field(Family::Y, 5, 5, s);
        let w = find_embedding(&x, &y, 2.0, lim).unwrap();
        if let Some(m) = &w {
            found += 1;
            verified += u32::from(verify_embedding(m, &x, &y).unwrap());
        }
        if s < 50 {
            agree += u32::from(w.is_some() == brute_exists(&x, &y, 2));
        }
        let d: Vec<bool> = ms.iter().map(|&m| find_embedding(&x, &y, m, lim).unwrap().is_some()).collect();
        monotone += u32::from(d.windows(2).all(|p| p[0] || !p[1]));
    }
    let ok = verified == found && agree == 50 && monotone == n as u32;
    outcome(ok, format!("{verified}/{found} witnesses verified over {n} instances, {agree}/50 decisions match enumeration, {monotone}/{n} monotone in M"))
}

fn criterion_5() -> Outcome {
    let p = ParameterSet::toy();
    let w1 = Rect::new(0, 0, 3, 3);
    let sw = site_window_for(Family::Y, w1, &p).unwrap();
    let n = 500u64;
    let reports = par_map(workers(), n, |s| {
        let f = sample_field(5000 + s, Family::Y, Point::new(sw.x0, sw.y0), sw.width() as u32, sw.height() as u32, u64::MAX).unwrap();
        let h = build(f, &p, 1).unwrap();
        let r = check_level(&h, 1);
        (r.ok(), r.blocks_checked, r.components_checked, r.violations.first().map(|v| v.to_string()))
    })
    .unwrap();
    let passed = reports.iter().filter(|r| r.0).count();
    let blocks: usize = reports.iter().map(|r| r.1).sum();
    let comps: usize = reports.iter().map(|r| r.2).sum();
    let first = reports.iter().find_map(|r| r.3.clone()).map(|v| format!("; first violation: {v}")).unwrap_or_default();
    outcome(passed == n as usize && blocks > 0, format!("{passed}/{n} windows, {blocks} blocks and {comps} components checked{first}"))
}

fn criterion_6() -> Outcome {
    let p = ParameterSet::toy();
    let g = p.level_geometry(1).unwrap();
    let none = |_: Point| false;
    let n = 10_000u64;
    let v = Point::new(2, 3);
    let corners = valid_corner_choices(&g, v, [true; 4], &none);
    let b = Bnd::between(Point::new(0, 0), Point::new(1, 0));
    let a = g.corner_radii[0];
    let edges = valid_edge_choices(&g, b, a, a, &none);
    let cell = LatticeAnimal::singleton(Point::new(0, 0));
    let (mut sc, mut se, mut scurve) = (0u64, 0u64, 0u64);
    for t in 0..n {
        sc += u64::from(choose_corner(&corners, t, 1, v) == CornerChoice::STRAIGHT);
        se += u64::from(choose_edge(&edges, t, 1, b) == 1);
        let c = select_boundary_curve(&cell, &g, t, &none, &|_| false).unwrap();
        scurve += u64::from(c.corners.iter().all(|x| x.1 == CornerChoice::STRAIGHT) && c.edges.iter().all(|e| e.1 == 1));
    }
    let target = 1.0 - curves::epsilon(0);
    let floor = target - 3.0 * sigma(target, n);
    let f = |k: u64| k as f64 / n as f64;
    let straight_ok = corners.len() > 1 && edges.len() > 1 && f(sc) >= floor && f(se) >= floor && f(scurve) >= floor;

    // Obstructions on an edge and on a vertex of the cell.
    let mut cleared = 0u64;
    let mut drawn = 0u64;
    for obstruction in [Point::new(g.ratio / 2, 1), Point::new(g.ratio, g.ratio)] {
        let bad = move |c: Point| c == obstruction;
        for t in 0..n {
            let c = select_boundary_curve(&cell, &g, t, &bad, &|_| false).unwrap();
            drawn += 1;
            cleared += u64::from(curves::clears(&c.polyline, g.clearance, &bad));
        }
    }
    outcome(
        straight_ok && cleared == drawn,
        format!(
            "straight frequency corner {:.6}, edge {:.6}, whole curve {:.6} (floor 1 - {:.1e}); {cleared}/{drawn} obstructed curves clear by {}",
            f(sc),
            f(se),
            f(scurve),
            1.0 - floor,
            g.clearance
        ),
    )
}

fn criterion_7() -> Outcome {
    let p = ParameterSet::toy();
    let w1 = Rect::new(0, 0, 4, 4);
    let sy = site_window_for(Family::Y, w1, &p).unwrap();
    let sx = site_window_for(Family::X, w1, &p).unwrap();
    let airport_bound = 2.0 * p.k0 as f64 * (p.v0 as f64).powi(-2) * (p.k0 as f64).powi(-4);
    let want = 200usize;
    let mut results: Vec<(bool, bool)> = Vec::new();
    let mut windows = 0u64;
    let batch = 24u64;
    while results.len() < want {
        let base = windows;
        let per = par_map(workers(), batch, |i| {
            let s = 7000 + base + i;
            let yf = sample_field(s, Family::Y, Point::new(sy.x0, sy.y0), sy.width() as u32, sy.height() as u32, u64::MAX).unwrap();
            let xf = sample_field(s, Family::X, Point::new(sx.x0, sx.y0), sx.width() as u32, sx.height() as u32, u64::MAX).unwrap();
            let y = build(yf, &p, 1).unwrap();
            let x = build(xf, &p, 1).unwrap();
            let mut out = Vec::new();
            for yb in &y.level(1).blocks {
                if !yb.good || yb.censored || yb.lattice_block.size() != 1 {
                    continue;
                }
                let u = yb.lattice_block.animal.sites()[0];
                let Some(xb) = x.level(1).block_at(u) else { continue };
                if !xb.good || xb.censored {
                    continue;
                }
                let w = embeds_level(&x, &y, &[u], 1).ok().flatten();
                let ok = w.as_ref().is_some_and(|w| verify_embedding(&w.map, &x.field, &y.field).unwrap_or(false));
                out.push((w.is_some(), ok));
            }
            out
        })
        .unwrap();
        windows += batch;
        results.extend(per.into_iter().flatten());
    }
    results.truncate(want);
    let found = results.iter().filter(|r| r.0).count();
    let verified = results.iter().filter(|r| r.1).count();
    outcome(
        found == want && verified == want && airport_bound < 1.0,
        format!("{found}/{want} good pairs embed, {verified}/{want} witnesses verify ({windows} windows; airport bound {airport_bound})"),
    )
}

fn criterion_8() -> Outcome {
    let p = ParameterSet::reference();
    let bundled = parse_profile(REFERENCE_PROFILE).map(|q| q == p).unwrap_or(false);
    let (a, b, g, m) = (p.alpha as i128, p.beta as i128, p.gamma as i128, p.m as i128);
    let (k0, v0) = (p.k0 as i128, p.v0 as i128);
    // Hand evaluation: (name, lhs, rhs, holds).
    let strict = |l: i128, r: i128| (l, r, l > r);
    let hand: Vec<(&str, i128, i128, bool)> = vec![
        ("alpha > 6", strict(a, 6)),
        ("gamma > 40 alpha", strict(g, 40 * a)),
        ("beta > 1500 alpha gamma", strict(b, 1500 * a * g)),
        ("k0 > 6000 alpha gamma", strict(k0, 6000 * a * g)),
        ("v0 > 3000 alpha", strict(v0, 3000 * a)),
        ("8 gamma (v0 - 1) > 3 alpha beta", strict(8 * g * (v0 - 1), 3 * a * b)),
        ("m >= 9 alpha beta + 3 alpha gamma v0", (m, 9 * a * b + 3 * a * g * v0, m >= 9 * a * b + 3 * a * g * v0)),
        ("gamma k0 > 300 alpha beta", strict(g * k0, 300 * a * b)),
        ("k0 > 10 gamma", strict(k0, 10 * g)),
    ]
    .into_iter()
    .map(|(n, (l, r, h))| (n, l, r, h))
    .collect();
    // (1 - 1e-10)^(4 v0) = exp(4 v0 ln(1 - 1e-10)); the margin to 9/10 dwarfs rounding.
    let tenth = (4.0 * p.v0 as f64 * (-1e-10f64).ln_1p()).exp() > 0.9;
    let r = check_constraints(&p);
    let mut ok = bundled && r.rows.len() == 10 && r.overall == r.rows.iter().all(|x| x.verdict == Verdict::Satisfied);
    let mut violated = Vec::new();
    for (name, l, rv, holds) in &hand {
        let Some(row) = r.rows.iter().find(|x| x.name == *name) else {
            ok = false;
            continue;
        };
        let want = if *holds { Verdict::Satisfied } else { Verdict::Violated };
        ok &= row.verdict == want && row.lhs == l.to_string() && row.rhs == rv.to_string();
        if !holds {
            violated.push(*name);
        }
    }
    let last = r.rows.iter().find(|x| x.name.starts_with("(1 - 1e-10)"));
    ok &= last.is_some_and(|x| x.verdict == if tenth { Verdict::Satisfied } else { Verdict::Violated });
    let satisfied = r.rows.iter().filter(|x| x.verdict == Verdict::Satisfied).count();
    outcome(ok, format!("10 constraints, {satisfied} satisfied, violated: {}", violated.join("; ")))
}

fn monotone_tail(rows: &[lipembed_core::stats::TailRow]) -> bool {
    let xs: BTreeSet<u64> = rows.iter().map(|r| r.x.to_bits()).collect();
    let vs: BTreeSet<u64> = rows.iter().map(|r| r.v).collect();
    let in_x = vs.iter().all(|&v| {
        let col: Vec<f64> = rows.iter().filter(|r| r.v == v).map(|r| r.empirical).collect();
        col.windows(2).all(|w| w[0] <= w[1])
    });
    let in_v = xs.iter().all(|&x| {
        let row: Vec<f64> = rows.iter().filter(|r| r.x.to_bits() == x).map(|r| r.empirical).collect();
        row.windows(2).all(|w| w[0] >= w[1])
    });
    in_x && in_v
}

fn criterion_9() -> Outcome {
    let p = ParameterSet::toy();
    let sites = drive::site_window(Family::Y, &p, None, (40, 40)).unwrap();
    let mut outputs = Vec::new();
    let mut monotone = true;
    for w in [1usize, 2, 4] {
        let s = survey(Family::Y, &p, sites, 0, 0, 24, 9, 50, w).unwrap();
        let xs = default_x_grid(&p, 0);
        let vmax = s.samples.iter().map(|x| x.1).max().unwrap_or(1);
        let vs: Vec<u64> = (1..=vmax.max(3)).collect();
        let tail = tail_report(&s.samples, &xs, &vs, &p, 0).unwrap();
        let size = size_report(&s.sizes, &p, 0).unwrap();
        let groups: Vec<_> = s.good.iter().map(|(l, g)| (Family::Y, *l, g.clone())).collect();
        let good = good_prob_report(&groups, &p, clopper_pearson).unwrap();
        monotone &= monotone_tail(&tail) && size[0].empirical == 1.0 && size.windows(2).all(|r| r[0].empirical >= r[1].empirical);
        monotone &= good.iter().all(|r| r.ci_low <= r.frequency && r.frequency <= r.ci_high);
        let mut text = String::new();
        for t in [tail_table(&tail), size_table(&size), good_table(&good)] {
            text.push_str(&t.to_csv());
            text.push_str(&t.to_jsonl());
        }
        outputs.push(text);
    }
    let h = y_line(&p, 2);
    let c = h.level(0).comp_of[Point::new(3, 3)] as usize;
    let e1 = drive::estimate_s(&h, 0, c, 3000, 4, 1).unwrap();
    let e4 = drive::estimate_s(&h, 0, c, 3000, 4, 4).unwrap();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]) && e1 == e4;

    let mut cover = Vec::new();
    for (k, prob) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let n = 400;
        let hits = (0..100u64)
            .filter(|&r| {
                let s = synthetic_successes(prob, n, 90_000 + 1000 * k as u64 + r);
                let e = ProbabilityEstimate::new(s, n, r, clopper_pearson);
                e.ci_low <= prob && prob <= e.ci_high
            })
            .count();
        cover.push(hits);
    }
    let ok = monotone && identical && cover.iter().all(|&h| h >= 90);
    outcome(
        ok,
        format!(
            "CDF columns monotone: {monotone}; coverage p=0.1/0.5/0.9: {}/{}/{} of 100; reports identical at 1, 2, 4 workers: {identical}",
            cover[0], cover[1], cover[2]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("level-0 Y exactness", criterion_1),
        ("level-0 X exactness", criterion_2),
        ("level-0 good-block probability", criterion_3),
        ("oracle soundness and equivalence", criterion_4),
        ("level-1 structural invariants", criterion_5),
        ("boundary-curve distribution", criterion_6),
        ("good blocks embed constructively", criterion_7),
        ("parameter auditor", criterion_8),
        ("report integrity", criterion_9),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        passed += usize::from(o.pass);
        println!(
            "criterion {} {}: {name}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
