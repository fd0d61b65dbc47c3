//! Parameter sets, derived scales, per-level toy geometry, and the constraint auditor.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: f64,
    pub k0: u64,
    pub v0: u64,
    pub l0: u64,
    pub m0: u32,
    /// Lipschitz bound `M` used when verifying site maps.
    pub lipschitz: f64,
    pub knobs: Knobs,
}

/// Desk-scale overrides of the level-1 geometry (all optional). Units are
/// level-0 cells except `margin`, which is in site units like [`crate::lattice::cell_geometry`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Knobs {
    pub margin: Option<u64>,
    pub clearance: Option<u32>,
    pub boundary_margin: Option<u32>,
    pub interior_margin: Option<u32>,
    pub corner_shift: Option<u32>,
    pub corner_radii: Option<Vec<u32>>,
    pub tracks: Option<Vec<i32>>,
    pub airport_side: Option<u32>,
    pub h_range: Option<u32>,
    pub field_cap: Option<u64>,
    pub shape_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamError {
    NonIntegralScale(u32),
    ScaleOverflow(u32),
    Geometry(String),
    Invalid(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NonIntegralScale(j) => write!(f, "L_{j} is not an integer (alpha^{j} must be integral)"),
            ParamError::ScaleOverflow(j) => write!(f, "L_{j} overflows 64 bits"),
            ParamError::Geometry(s) => write!(f, "geometry: {s}"),
            ParamError::Invalid(s) => write!(f, "invalid parameters: {s}"),
        }
    }
}

/// Discrete geometry of level `j >= 1`, in level-(j-1) cell units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelGeometry {
    pub level: u32,
    /// Level-(j-1) cells per level-j cell side.
    pub ratio: i64,
    /// Buffer half-width.
    pub margin: i64,
    /// Minimum gap between a boundary curve and a bad component.
    pub clearance: i64,
    /// Minimum gap between a bad subcomponent and its block's boundary.
    pub boundary_margin: i64,
    /// Minimum gap for matched sets in canonical maps.
    pub interior_margin: i64,
    /// Diagonal shift of a perturbed corner (`s_v = 2`).
    pub corner_shift: i64,
    /// Half-side of the corner square `T_l`, indexed by `l - 1`.
    pub corner_radii: Vec<i64>,
    /// Edge track offsets indexed by `s - 1`; `tracks[0] = 0` is the straight curve.
    pub tracks: Vec<i64>,
    pub airport_side: i64,
    pub h_range: i64,
}

impl ParameterSet {
    /// Published large-scale values. `L0` and `M0` are left open there ("sufficiently large");
    /// the placeholders below are never read by the auditor.
    pub fn reference() -> Self {
        ParameterSet {
            alpha: 8.0,
            beta: 4_500_000.0,
            gamma: 350.0,
            m: 150_000_000.0,
            k0: 13_000_000,
            v0: 45_000,
            l0: 2,
            m0: 3,
            lipschitz: 60.0,
            knobs: Knobs::default(),
        }
    }

    /// Desk-scale profile used by the acceptance suite.
    pub fn toy() -> Self {
        ParameterSet {
            alpha: 2.0,
            beta: 2.0,
            gamma: 3.0,
            m: 5.0,
            k0: 1,
            v0: 2,
            l0: 36,
            m0: 10,
            lipschitz: 200.0,
            knobs: Knobs { margin: Some(8 * 36), clearance: Some(2), boundary_margin: Some(2), interior_margin: Some(1), ..Knobs::default() },
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let pos = |v: f64, n: &str| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(ParamError::Invalid(format!("{n} must be positive"))) };
        pos(self.alpha, "alpha")?;
        pos(self.beta, "beta")?;
        pos(self.gamma, "gamma")?;
        pos(self.m, "m")?;
        pos(self.lipschitz, "M")?;
        if self.k0 == 0 || self.v0 == 0 || self.l0 < 2 || self.m0 == 0 {
            return Err(ParamError::Invalid("k0, v0, M0 must be >= 1 and L0 >= 2".to_string()));
        }
        Ok(())
    }

    /// `alpha^j` as an integer, if it is one.
    fn alpha_pow(&self, j: u32) -> Result<u64, ParamError> {
        if j == 0 {
            return Ok(1);
        }
        if libm::trunc(self.alpha) != self.alpha || self.alpha < 1.0 || self.alpha > 64.0 {
            return Err(ParamError::NonIntegralScale(j));
        }
        (self.alpha as u64).checked_pow(j).ok_or(ParamError::ScaleOverflow(j))
    }

    /// `L_j = L0^(alpha^j)`.
    pub fn scale(&self, j: u32) -> Result<u64, ParamError> {
        let e = self.alpha_pow(j)?;
        let e = u32::try_from(e).map_err(|_| ParamError::ScaleOverflow(j))?;
        self.l0.checked_pow(e).ok_or(ParamError::ScaleOverflow(j))
    }

    /// `L_j` as a float (may be infinite for the reference profile).
    pub fn scale_f64(&self, j: u32) -> f64 {
        libm::pow(self.l0 as f64, libm::pow(self.alpha, j as f64))
    }

    /// `m_j = m + 2^-j`.
    pub fn m_j(&self, j: u32) -> f64 {
        self.m + libm::ldexp(1.0, -(j as i32))
    }

    /// Level-(j-1) cells per level-j cell side.
    pub fn ratio(&self, j: u32) -> Result<u64, ParamError> {
        assert!(j >= 1);
        Ok(self.scale(j)? / self.scale(j - 1)?)
    }

    /// Buffer half-width at level `j >= 1` in site units: the configured value for level 1,
    /// otherwise `L_{j-1}^5` capped to the largest multiple of `L_{j-1}` below `L_j / 4`.
    pub fn margin_site_units(&self, j: u32) -> Result<u64, ParamError> {
        assert!(j >= 1);
        if j == 1 {
            if let Some(m) = self.knobs.margin {
                return Ok(m);
            }
        }
        let below = self.scale(j - 1)?;
        let r = self.ratio(j)?;
        let cap = (r.saturating_sub(1)) / 4;
        let full = below.checked_pow(4).unwrap_or(u64::MAX);
        Ok(full.min(cap) * below)
    }

    /// Upper bound on bits in one sampled window.
    pub fn field_cap(&self) -> u64 {
        self.knobs.field_cap.unwrap_or(1 << 26)
    }

    pub fn shape_cap(&self) -> usize {
        self.knobs.shape_cap.unwrap_or(12)
    }

    /// `ceil(M0^2 / 3)`.
    pub fn good_threshold(&self) -> u32 {
        let n = self.m0 * self.m0;
        n.div_ceil(3)
    }

    /// `1 - 1/(v0^5 k0^4 100^j)` as an exact rational.
    pub fn semibad_threshold(&self, j: u32) -> BigRational {
        let d = BigInt::from(self.v0).pow(5) * BigInt::from(self.k0).pow(4) * BigInt::from(100u32).pow(j);
        BigRational::one() - BigRational::new(BigInt::one(), d)
    }

    /// `1 - v0^-2 k0^-4 100^-j`.
    pub fn airport_fraction(&self, j: u32) -> BigRational {
        let d = BigInt::from(self.v0).pow(2) * BigInt::from(self.k0).pow(4) * BigInt::from(100u32).pow(j);
        BigRational::one() - BigRational::new(BigInt::one(), d)
    }

    /// Discrete geometry of level `j >= 1`, defaults derived from the asymptotic formulas
    /// and scaled into a single level-j cell.
    pub fn level_geometry(&self, j: u32) -> Result<LevelGeometry, ParamError> {
        assert!(j >= 1);
        let below = self.scale(j - 1)? as i64;
        let r = self.ratio(j)? as i64;
        let mp = self.margin_site_units(j)? as i64;
        if mp % below != 0 {
            return Err(ParamError::Geometry(format!("margin {mp} is not a multiple of L_{} = {below}", j - 1)));
        }
        let m = mp / below;
        let k = &self.knobs;
        let lvl1 = j == 1;
        let pick = |o: Option<u32>, d: i64| if lvl1 { o.map(|v| v as i64).unwrap_or(d) } else { d };
        let clearance = pick(k.clearance, (m / 4).max(1));
        let boundary_margin = pick(k.boundary_margin, clearance.max(1));
        let interior_margin = pick(k.interior_margin, (clearance - 1).max(0));
        let q = pick(k.corner_shift, clearance + 1);
        let sep = 2 * clearance;
        let n = 2 * self.k0 as usize;
        let tracks: Vec<i64> = match (&k.tracks, lvl1) {
            (Some(t), true) => t.iter().map(|&v| v as i64).collect(),
            _ => {
                let mut t = vec![0i64];
                let mut step = 1;
                while t.len() < n {
                    t.push(sep * step);
                    if t.len() < n {
                        t.push(-sep * step);
                    }
                    step += 1;
                }
                t
            }
        };
        let tmax = tracks.iter().map(|t| t.abs()).max().unwrap_or(0);
        let radii: Vec<i64> = match (&k.corner_radii, lvl1) {
            (Some(a), true) => a.iter().map(|&v| v as i64).collect(),
            _ => {
                let a1 = (q + 1).max(tmax);
                (0..n as i64).map(|l| a1 + sep * l).collect()
            }
        };
        let airport_default = {
            let full = libm::ceil(libm::pow(below as f64, 1.5)) as i64;
            full.min(((r - 2 * m) / 2).max(1))
        };
        let g = LevelGeometry {
            level: j,
            ratio: r,
            margin: m,
            clearance,
            boundary_margin,
            interior_margin,
            corner_shift: q,
            corner_radii: radii,
            tracks,
            airport_side: pick(k.airport_side, airport_default),
            h_range: pick(k.h_range, 4),
        };
        g.check(n)?;
        Ok(g)
    }
}

impl LevelGeometry {
    fn check(&self, n: usize) -> Result<(), ParamError> {
        let fail = |s: String| Err(ParamError::Geometry(s));
        if self.corner_radii.len() != n || self.tracks.len() != n {
            return fail(format!("need 2*k0 = {n} corner radii and tracks"));
        }
        if self.tracks[0] != 0 {
            return fail("track 1 must be the straight offset 0".to_string());
        }
        if 4 * self.margin >= self.ratio {
            return fail(format!("buffer half-width {} must stay below cell size {} / 4", self.margin, self.ratio));
        }
        if self.clearance < 1 || self.interior_margin >= self.clearance || self.boundary_margin > self.clearance {
            return fail("need interior_margin < clearance, boundary_margin <= clearance, clearance >= 1".to_string());
        }
        if 4 * self.clearance >= self.ratio {
            return fail("clearance must stay below cell size / 4".to_string());
        }
        let a_min = *self.corner_radii.iter().min().unwrap();
        let a_max = *self.corner_radii.iter().max().unwrap();
        if self.corner_shift < 1 || self.corner_shift >= a_min {
            return fail("corner shift must lie in [1, smallest corner radius)".to_string());
        }
        if a_max > self.margin || 2 * a_max >= self.ratio {
            return fail("corner squares must fit in the buffer".to_string());
        }
        if self.tracks.iter().any(|t| t.abs() > a_min) {
            return fail("edge tracks must not exceed the smallest corner radius".to_string());
        }
        let sorted_distinct = |v: &[i64]| {
            let mut s = v.to_vec();
            s.sort();
            s.windows(2).all(|w| w[1] - w[0] >= 2 * self.clearance)
        };
        if !sorted_distinct(&self.corner_radii) || !sorted_distinct(&self.tracks) {
            return fail("corner radii and tracks must be separated by 2 * clearance".to_string());
        }
        if self.airport_side < 1 || self.h_range < 1 {
            return fail("airport side and h range must be >= 1".to_string());
        }
        Ok(())
    }

    /// Separation between distinct corner radii / tracks.
    pub fn separation(&self) -> i64 {
        2 * self.clearance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub verdict: Verdict,
    /// Exact `lhs - rhs` for the algebraic rows; the enclosure midpoint for the last row.
    pub slack: String,
    pub slack_f64: f64,
    /// Certified half-width of the enclosure (zero for exact rows).
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub rows: Vec<ConstraintRow>,
    pub overall: bool,
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite parameter")
}

fn ri(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn show(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Enclosure `[lo, hi]` of `ln(1 - x)` for rational `0 < x <= 1/2`, with width below `tol`.
fn ln_one_minus(x: &BigRational, tol: &BigRational) -> (BigRational, BigRational) {
    // ln(1-x) = -sum_k x^k / k; the tail after K terms is at most x^(K+1) / ((K+1)(1-x)).
    let mut sum = BigRational::zero();
    let mut pow = x.clone();
    let mut k = 1u32;
    loop {
        sum += &pow / BigRational::from_integer(BigInt::from(k));
        pow = &pow * x;
        let tail = &pow / (BigRational::from_integer(BigInt::from(k + 1)) * (BigRational::one() - x));
        if &tail < tol {
            return (-(&sum + &tail), -sum);
        }
        k += 1;
    }
}

/// Evaluates the ten constraints of the parameter system exactly (the last one by a
/// certified enclosure of width below 1e-15).
pub fn check_constraints(p: &ParameterSet) -> ConstraintReport {
    let (a, b, g, m) = (rat(p.alpha), rat(p.beta), rat(p.gamma), rat(p.m));
    let (k0, v0) = (ri(p.k0), ri(p.v0));
    let n = |v: u64| ri(v);
    let algebraic: Vec<(&'static str, BigRational, BigRational, bool)> = vec![
        ("alpha > 6", a.clone(), n(6), true),
        ("gamma > 40 alpha", g.clone(), n(40) * &a, true),
        ("beta > 1500 alpha gamma", b.clone(), n(1500) * &a * &g, true),
        ("k0 > 6000 alpha gamma", k0.clone(), n(6000) * &a * &g, true),
        ("v0 > 3000 alpha", v0.clone(), n(3000) * &a, true),
        ("8 gamma (v0 - 1) > 3 alpha beta", n(8) * &g * (&v0 - n(1)), n(3) * &a * &b, true),
        ("m >= 9 alpha beta + 3 alpha gamma v0", m.clone(), n(9) * &a * &b + n(3) * &a * &g * &v0, false),
        ("gamma k0 > 300 alpha beta", &g * &k0, n(300) * &a * &b, true),
        ("k0 > 10 gamma", k0.clone(), n(10) * &g, true),
    ];
    let mut rows = Vec::new();
    for (name, lhs, rhs, strict) in algebraic {
        let ok = if strict { lhs > rhs } else { lhs >= rhs };
        let slack = &lhs - &rhs;
        rows.push(ConstraintRow {
            name,
            lhs: show(&lhs),
            rhs: show(&rhs),
            verdict: if ok { Verdict::Satisfied } else { Verdict::Violated },
            slack_f64: to_f64(&slack),
            slack: show(&slack),
            error_bound: 0.0,
        });
    }
    // (1 - 1e-10)^(4 v0) > 9/10  <=>  4 v0 ln(1 - 1e-10) > ln(9/10)
    let ten = BigInt::from(10u32);
    let eps = BigRational::new(BigInt::one(), ten.pow(10));
    let tenth = BigRational::new(BigInt::one(), ten.clone());
    let tol = BigRational::new(BigInt::one(), ten.pow(18));
    let scale = n(4) * &v0;
    let tol_l = &tol / &scale;
    let (l_lo, l_hi) = ln_one_minus(&eps, &tol_l);
    let (r_lo, r_hi) = ln_one_minus(&tenth, &tol);
    let (lhs_lo, lhs_hi) = (&scale * l_lo, &scale * l_hi);
    let d_lo = &lhs_lo - &r_hi;
    let d_hi = &lhs_hi - &r_lo;
    let verdict = if d_lo.is_positive() {
        Verdict::Satisfied
    } else if d_hi.is_negative() || d_hi.is_zero() {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    let mid = (&d_lo + &d_hi) / n(2);
    let half = to_f64(&((&d_hi - &d_lo) / n(2))).max(0.0);
    let bound = 1e-15;
    let verdict = if verdict != Verdict::Inconclusive && to_f64(&mid).abs() <= bound { Verdict::Inconclusive } else { verdict };
    rows.push(ConstraintRow {
        name: "(1 - 1e-10)^(4 v0) > 9/10",
        lhs: format!("exp({:.17e})", to_f64(&((&lhs_lo + &lhs_hi) / n(2)))),
        rhs: "9/10".to_string(),
        verdict,
        slack: format!("{:.17e}", to_f64(&mid)),
        slack_f64: to_f64(&mid),
        error_bound: half.max(bound),
    });
    let overall = rows.iter().all(|r| r.verdict == Verdict::Satisfied);
    ConstraintReport { rows, overall }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_geometry_is_consistent() {
        let g = ParameterSet::toy().level_geometry(1).unwrap();
        assert_eq!(g.ratio, 36);
        assert_eq!(g.margin, 8);
        assert_eq!(g.tracks, vec![0, 4]);
        assert_eq!(g.corner_radii, vec![4, 8]);
    }

    #[test]
    fn scales() {
        let p = ParameterSet::toy();
        assert_eq!(p.scale(0).unwrap(), 36);
        assert_eq!(p.scale(1).unwrap(), 1296);
        assert!(ParameterSet::reference().scale(3).is_err());
    }

    #[test]
    fn ln_enclosure_brackets_float() {
        let x = BigRational::new(BigInt::from(1), BigInt::from(10));
        let tol = BigRational::new(BigInt::from(1), BigInt::from(10u64.pow(17)));
        let (lo, hi) = ln_one_minus(&x, &tol);
        let f = libm::log(0.9);
        assert!(to_f64(&lo) <= f + 1e-15 && f - 1e-15 <= to_f64(&hi));
    }
}
