use lipembed_core::fields::y_block_rect;
use lipembed_core::hierarchy::{build, Cell0};
use lipembed_core::stats::{
    class_probabilities, default_x_grid, estimate_s, exact_s0, good_prob_report, size_report, tail_report,
    ProbabilityEstimate, StatsError,
};
use lipembed_core::{BitField, Family, ParameterSet, Point, Rect, Y0Class};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

fn wald(s: u64, n: u64) -> (f64, f64) {
    let p = s as f64 / n as f64;
    let h = 1.96 * (p * (1.0 - p) / n as f64).sqrt();
    ((p - h).max(0.0), (p + h).min(1.0))
}

/// `P[good] + P[zero]` for a Y block of `m0^2` fair bits, counting all patterns.
fn enumerate_x0_success(m0: u32) -> BigRational {
    let n = m0 * m0;
    let thr = n.div_ceil(3);
    let mut hits = 0u64;
    for pat in 0u64..(1 << n) {
        let ones = pat.count_ones();
        let zeros = n - ones;
        let good = ones >= thr && zeros >= thr;
        let zero_class = !good && zeros > ones;
        hits += u64::from(good || zero_class);
    }
    BigRational::new(BigInt::from(hits), BigInt::from(1u64 << n))
}

#[test]
fn x_singleton_matches_pattern_enumeration() {
    for m0 in [2u32, 3] {
        let p = ParameterSet { m0, lipschitz: 20.0 * m0 as f64, ..ParameterSet::toy() };
        let exact = exact_s0(Family::X, &[Cell0::Bit(0)], &p);
        assert_eq!(exact, enumerate_x0_success(m0), "M0 = {m0}");
        // By symmetry the bit-1 singleton has the same probability.
        assert_eq!(exact_s0(Family::X, &[Cell0::Bit(1)], &p), exact);
    }
    let p = ParameterSet { m0: 2, ..ParameterSet::toy() };
    assert_eq!(exact_s0(Family::X, &[Cell0::Bit(0)], &p), BigRational::new(BigInt::from(11), BigInt::from(16)));
}

#[test]
fn class_probabilities_sum_to_one() {
    for m0 in 1..=12u32 {
        let thr = (m0 * m0).div_ceil(3);
        let (g, z, o) = class_probabilities(m0, thr);
        assert_eq!(&g + &z + &o, BigRational::one());
        // Ties go to One, so One is never less likely than Zero.
        assert!(o >= z);
    }
}

#[test]
fn y_component_is_inverse_power_of_two() {
    let p = ParameterSet::toy();
    for v in 1..=5usize {
        let cells = vec![Cell0::Class(Y0Class::Zero); v];
        assert_eq!(exact_s0(Family::Y, &cells, &p), BigRational::new(BigInt::one(), BigInt::from(1u64 << v)));
    }
}

fn y_line(p: &ParameterSet, v: usize) -> lipembed_core::hierarchy::Hierarchy {
    // v forced-bad cells in a row, inside a 3-cell margin of good checkerboard blocks.
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

#[test]
fn estimate_s_is_deterministic_and_rejects_zero_trials() {
    let p = ParameterSet::toy();
    let h = y_line(&p, 2);
    let c = h.level(0).comp_of[Point::new(3, 3)] as usize;
    assert!(matches!(estimate_s(&h, 0, c, 0, 1, wald), Err(StatsError::NoTrials)));
    let a = estimate_s(&h, 0, c, 400, 9, wald).unwrap();
    let b = estimate_s(&h, 0, c, 400, 9, wald).unwrap();
    assert_eq!(a, b);
    assert!(a.ci_low <= a.estimate && a.estimate <= a.ci_high);
}

#[test]
fn estimate_s_agrees_with_exact_on_small_y_components() {
    let p = ParameterSet::toy();
    for v in 1..=3usize {
        let h = y_line(&p, v);
        let c = h.level(0).comp_of[Point::new(3, 3)] as usize;
        let comp = &h.level(0).components[c];
        assert_eq!(comp.size(), v);
        let exact = 0.5f64.powi(v as i32);
        let n = 4000;
        let e = estimate_s(&h, 0, c, n, 100 + v as u64, wald).unwrap();
        assert!((e.estimate - exact).abs() <= 3.0 * ProbabilityEstimate::sigma(exact, n), "v = {v}: {}", e.estimate);
    }
}

#[test]
fn reports_are_monotone() {
    let p = ParameterSet::toy();
    let samples: Vec<(f64, u64)> = (0..200u64).map(|i| (((i * 37) % 101) as f64 / 100.0, 1 + i % 4)).collect();
    let xs = default_x_grid(&p, 0);
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let vs = [1, 2, 3, 4];
    let rows = tail_report(&samples, &xs, &vs, &p, 0).unwrap();
    for v in vs {
        let col: Vec<f64> = rows.iter().filter(|r| r.v == v).map(|r| r.empirical).collect();
        assert!(col.windows(2).all(|w| w[0] <= w[1]));
    }
    for &x in &xs {
        let row: Vec<f64> = rows.iter().filter(|r| r.x == x).map(|r| r.empirical).collect();
        assert!(row.windows(2).all(|w| w[0] >= w[1]));
    }
    // Recount: P(S <= 1/2, V >= 1).
    let half = rows.iter().find(|r| r.v == 1 && r.x == 0.5).unwrap();
    assert_eq!(half.count, samples.iter().filter(|s| s.0 <= 0.5).count() as u64);
    // Bound at the top grid point and v = 1.
    let top = *xs.last().unwrap();
    let lj = p.scale(0).unwrap() as f64;
    let want = top.powf(p.m_j(0)) * lj.powf(-p.beta);
    let got = rows.iter().find(|r| r.v == 1 && r.x == top).unwrap().bound;
    assert!((got - want).abs() <= 1e-12 * want);

    let sizes: Vec<u64> = samples.iter().map(|s| s.1).collect();
    let srows = size_report(&sizes, &p, 0).unwrap();
    assert_eq!(srows[0].empirical, 1.0);
    assert!(srows.windows(2).all(|w| w[0].empirical >= w[1].empirical));
    assert!(matches!(size_report(&[], &p, 0), Err(StatsError::NoSamples)));
}

#[test]
fn level0_x_blocks_are_all_good() {
    let p = ParameterSet::toy();
    let f = lipembed_core::fields::sample_field(3, Family::X, Point::new(0, 0), 30, 30, u64::MAX).unwrap();
    let h = build(f, &p, 0).unwrap();
    let flags: Vec<bool> = h.level(0).blocks.iter().map(|b| b.good).collect();
    let rows = good_prob_report(&[(Family::X, 0, flags)], &p, wald).unwrap();
    assert_eq!(rows[0].frequency, 1.0);
    let sizes: Vec<u64> = h.level(0).components.iter().map(|c| c.size() as u64).collect();
    assert!(sizes.iter().all(|&s| s == 1));
    assert!(rows[0].target < 1.0);
}
