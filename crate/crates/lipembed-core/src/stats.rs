//! Exact level-0 embedding probabilities, the seeded trial driver, and report tables.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::embed::{embeds_level, Witness};
use crate::fields::{classify_counts, sample_field, Family, Y0Class};
use crate::hierarchy::{build, site_window_for, Cell0, Hierarchy};
use crate::lattice::{Point, Rect};
use crate::params::ParameterSet;
use crate::rng;

/// Exact probabilities `(good, zero, one)` of a Y block of `M0^2` fair bits.
pub fn class_probabilities(m0: u32, threshold: u32) -> (BigRational, BigRational, BigRational) {
    let n = m0 * m0;
    let mut acc = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    let mut binom = BigInt::one();
    for k in 0..=n {
        let slot = match classify_counts(k, n - k, threshold) {
            Y0Class::Good => 0,
            Y0Class::Zero => 1,
            Y0Class::One => 2,
        };
        acc[slot] += &binom;
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    let den = BigInt::one() << n;
    let [g, z, o] = acc;
    (BigRational::new(g, den.clone()), BigRational::new(z, den.clone()), BigRational::new(o, den))
}

/// Exact level-0 embedding probability of a component of `family` with cell data `cells`.
///
/// Y: `2^-b` with `b` the number of bad cells (1 when none). X: the product over cells of
/// `P[good] + P[class matching the bit]`.
pub fn exact_s0(family: Family, cells: &[Cell0], params: &ParameterSet) -> BigRational {
    match family {
        Family::Y => {
            let b = cells.iter().filter(|c| !c.is_good()).count();
            BigRational::new(BigInt::one(), BigInt::one() << b)
        }
        Family::X => {
            let (g, z, o) = class_probabilities(params.m0, params.good_threshold());
            let mut s = BigRational::one();
            for c in cells {
                s *= match c {
                    Cell0::Bit(0) => &g + &z,
                    _ => &g + &o,
                };
            }
            s
        }
    }
}

/// A Monte Carlo frequency with its confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityEstimate {
    pub estimate: f64,
    pub trials: u64,
    pub successes: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Confidence interval rule `(successes, trials) -> (low, high)`.
pub type Interval = fn(u64, u64) -> (f64, f64);

impl ProbabilityEstimate {
    pub fn new(successes: u64, trials: u64, seed: u64, ci: Interval) -> Self {
        assert!(successes <= trials && trials > 0);
        let (lo, hi) = ci(successes, trials);
        ProbabilityEstimate { estimate: successes as f64 / trials as f64, trials, successes, ci_low: lo, ci_high: hi, seed }
    }
    /// Binomial standard error at probability `p`.
    pub fn sigma(p: f64, trials: u64) -> f64 {
        libm::sqrt(p * (1.0 - p) / trials as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatsError {
    NoTrials,
    NoSamples,
    Build(crate::hierarchy::BuildError),
    Unsupported(&'static str),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::NoTrials => write!(f, "trials must be >= 1"),
            StatsError::NoSamples => write!(f, "need at least one sample"),
            StatsError::Build(e) => write!(f, "partner window: {e}"),
            StatsError::Unsupported(s) => write!(f, "{s}"),
        }
    }
}

impl From<crate::hierarchy::BuildError> for StatsError {
    fn from(e: crate::hierarchy::BuildError) -> Self {
        StatsError::Build(e)
    }
}

/// Runs trials `0..n` in order, counting successes; trial `t` sees `rng::trial_seed(seed, t)`.
pub fn run_trials(n: u64, seed: u64, mut trial: impl FnMut(u64) -> bool) -> u64 {
    (0..n).filter(|&t| trial(rng::trial_seed(seed, t))).count() as u64
}

/// One row of the tail table.
#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub level: u32,
    pub x: f64,
    pub v: u64,
    pub empirical: f64,
    pub count: u64,
    pub samples: u64,
    /// `log10` of `x^{m_j} L_j^{-beta} L_j^{-gamma (v - 1)}`.
    pub bound_log10: f64,
    pub bound: f64,
    /// `empirical / bound` (infinite when the bound underflows).
    pub ratio: f64,
}

fn log10_lj(params: &ParameterSet, j: u32) -> f64 {
    libm::log10(params.l0 as f64) * libm::pow(params.alpha, j as f64)
}

/// Asymptotic bound on `P(S <= x, V >= v)` in log10.
pub fn tail_bound_log10(params: &ParameterSet, j: u32, x: f64, v: u64) -> f64 {
    let llj = log10_lj(params, j);
    params.m_j(j) * libm::log10(x) - params.beta * llj - params.gamma * (v as f64 - 1.0) * llj
}

/// Asymptotic bound on `P(V >= v)` in log10.
pub fn size_bound_log10(params: &ParameterSet, j: u32, v: u64) -> f64 {
    -params.gamma * (v as f64 - 1.0) * log10_lj(params, j)
}

fn ratio(emp: f64, bound_log10: f64) -> f64 {
    let b = libm::pow(10.0, bound_log10);
    if b > 0.0 {
        emp / b
    } else if emp == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Default x grid: `1 - L_j^{-1}` and the dyadic points below it down to `2^-8`.
pub fn default_x_grid(params: &ParameterSet, j: u32) -> Vec<f64> {
    let top = 1.0 - libm::pow(10.0, -log10_lj(params, j));
    let mut xs: Vec<f64> = (1..=8).rev().map(|k| libm::ldexp(1.0, -k)).filter(|&x| x < top).collect();
    xs.push(top);
    xs
}

/// Empirical `P(S <= x, V >= v)` over `(S, V)` samples for every grid point, with the bound.
pub fn tail_report(samples: &[(f64, u64)], xs: &[f64], vs: &[u64], params: &ParameterSet, j: u32) -> Result<Vec<TailRow>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::NoSamples);
    }
    let n = samples.len() as u64;
    let mut rows = Vec::new();
    for &v in vs {
        for &x in xs {
            let count = samples.iter().filter(|&&(s, sv)| s <= x && sv >= v).count() as u64;
            let emp = count as f64 / n as f64;
            let bl = tail_bound_log10(params, j, x, v);
            rows.push(TailRow { level: j, x, v, empirical: emp, count, samples: n, bound_log10: bl, bound: libm::pow(10.0, bl), ratio: ratio(emp, bl) });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeRow {
    pub level: u32,
    pub v: u64,
    pub empirical: f64,
    pub count: u64,
    pub samples: u64,
    pub bound_log10: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Empirical `P(V >= v)` for `v = 1..=max(V)` against `L_j^{-gamma (v - 1)}`.
pub fn size_report(sizes: &[u64], params: &ParameterSet, j: u32) -> Result<Vec<SizeRow>, StatsError> {
    if sizes.is_empty() {
        return Err(StatsError::NoSamples);
    }
    let n = sizes.len() as u64;
    let vmax = sizes.iter().copied().max().unwrap_or(1).max(1);
    Ok((1..=vmax)
        .map(|v| {
            let count = sizes.iter().filter(|&&s| s >= v).count() as u64;
            let emp = count as f64 / n as f64;
            let bl = size_bound_log10(params, j, v);
            SizeRow { level: j, v, empirical: emp, count, samples: n, bound_log10: bl, bound: libm::pow(10.0, bl), ratio: ratio(emp, bl) }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodRow {
    pub level: u32,
    pub family: Family,
    pub blocks: u64,
    pub good: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `1 - L_j^{-gamma}`.
    pub target: f64,
}

/// Good-block frequency per (family, level) group, with confidence intervals.
pub fn good_prob_report(groups: &[(Family, u32, Vec<bool>)], params: &ParameterSet, ci: Interval) -> Result<Vec<GoodRow>, StatsError> {
    let mut rows = Vec::new();
    for (family, j, flags) in groups {
        if flags.is_empty() {
            return Err(StatsError::NoSamples);
        }
        let good = flags.iter().filter(|&&g| g).count() as u64;
        let n = flags.len() as u64;
        let (lo, hi) = ci(good, n);
        rows.push(GoodRow {
            level: *j,
            family: *family,
            blocks: n,
            good,
            frequency: good as f64 / n as f64,
            ci_low: lo,
            ci_high: hi,
            target: 1.0 - libm::pow(10.0, -params.gamma * log10_lj(params, *j)),
        });
    }
    Ok(rows)
}

/// Bernoulli(`p`) stream of `n` draws keyed by `seed`, for calibrating interval rules.
pub fn synthetic_successes(p: f64, n: u64, seed: u64) -> u64 {
    let mut r = rng::keyed(seed, rng::TAG_MISC, 1, 0, 0);
    (0..n).filter(|_| rng::unit_f64(&mut r) < p).count() as u64
}

/// Exact good probability of a level-0 Y block as a float.
pub fn y0_good_probability(params: &ParameterSet) -> f64 {
    use num_traits::ToPrimitive;
    class_probabilities(params.m0, params.good_threshold()).0.to_f64().unwrap_or(f64::NAN)
}

/// Convenience for tests and reports: `vec![false; bad] ++ vec![true; good]`.
pub fn flags(good: usize, bad: usize) -> Vec<bool> {
    let mut v = vec![false; bad];
    v.extend(core::iter::repeat(true).take(good));
    v
}

/// One prepared embedding-probability experiment: a component and the partner window
/// sampled afresh by every trial.
#[derive(Clone, Debug)]
pub struct STrial<'a> {
    h: &'a Hierarchy,
    level: u32,
    index_set: Vec<Point>,
    partner: Family,
    sites: Rect,
}

impl<'a> STrial<'a> {
    /// Component `comp` of level `j` of `h`; the partner window covers its bounding box.
    pub fn new(h: &'a Hierarchy, j: u32, comp: usize) -> Result<Self, StatsError> {
        let c = h.levels.get(j as usize).and_then(|l| l.components.get(comp)).ok_or(StatsError::Unsupported("no such component"))?;
        if c.censored {
            return Err(StatsError::Unsupported("component is censored"));
        }
        let index_set = c.animal.sites().to_vec();
        let partner = h.family.partner();
        let bb = Rect::bounding(&index_set);
        let sites = if j == 0 {
            let s = match partner {
                Family::X => 1,
                Family::Y => h.params.m0 as i64,
            };
            Rect::new(bb.x0 * s, bb.y0 * s, bb.x1 * s, bb.y1 * s)
        } else {
            site_window_for(partner, bb, &h.params).map_err(|e| StatsError::Build(e.into()))?
        };
        Ok(STrial { h, level: j, index_set, partner, sites })
    }

    pub fn partner_window(&self) -> Rect {
        self.sites
    }

    /// Whether the partner field keyed by `trial_seed` is valid and embeds.
    pub fn run(&self, trial_seed: u64) -> Result<bool, StatsError> {
        Ok(self.witness(trial_seed)?.is_some())
    }

    /// The witness of trial `trial_seed`, if it succeeds.
    pub fn witness(&self, trial_seed: u64) -> Result<Option<Witness>, StatsError> {
        let r = self.sites;
        let f = sample_field(trial_seed, self.partner, Point::new(r.x0, r.y0), r.width() as u32, r.height() as u32, u64::MAX)
            .map_err(|_| StatsError::Unsupported("partner window too large"))?;
        let other = build(f, &self.h.params, self.level)?;
        let (x, y) = match self.h.family {
            Family::X => (self.h, &other),
            Family::Y => (&other, self.h),
        };
        Ok(embeds_level(x, y, &self.index_set, self.level).ok().flatten())
    }
}

/// Monte Carlo estimate of the embedding probability of component `comp` of level `j`
/// of `h`: each trial samples a fresh partner window over the component's bounding box,
/// builds the partner hierarchy to level `j`, and counts validity plus an embedding.
pub fn estimate_s(h: &Hierarchy, j: u32, comp: usize, trials: u64, seed: u64, ci: Interval) -> Result<ProbabilityEstimate, StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    let exp = STrial::new(h, j, comp)?;
    let mut successes = 0;
    for t in 0..trials {
        successes += u64::from(exp.run(rng::trial_seed(seed, t))?);
    }
    Ok(ProbabilityEstimate::new(successes, trials, seed, ci))
}
