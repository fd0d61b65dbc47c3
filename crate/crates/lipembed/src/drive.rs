//! Parallel experiment drivers. Trial `t` is keyed by `trial_seed(seed, t)` and results
//! are combined in trial order, so the worker count never changes an output.

use lipembed_core::embed::Witness;
use lipembed_core::hierarchy::{build, site_window_for, Hierarchy, SValue, Status};
use lipembed_core::rng::trial_seed;
use lipembed_core::stats::{ProbabilityEstimate, STrial};
use lipembed_core::{Family, ParameterSet, Point, Rect};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::ci::clopper_pearson;
use crate::error::{Error, Result};

pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// `f(0), ..., f(n - 1)` on `workers` threads, in index order.
pub fn par_map<T: Send>(workers: usize, n: u64, f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
    if workers == 1 {
        return Ok((0..n).map(f).collect());
    }
    Ok(pool(workers)?.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Monte Carlo embedding probability of a component with a Clopper-Pearson interval.
pub fn estimate_s(h: &Hierarchy, j: u32, comp: usize, trials: u64, seed: u64, workers: usize) -> Result<ProbabilityEstimate> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let exp = STrial::new(h, j, comp)?;
    let outcomes = par_map(workers, trials, |t| exp.run(trial_seed(seed, t)))?;
    let mut successes = 0;
    for o in outcomes {
        successes += u64::from(o?);
    }
    Ok(ProbabilityEstimate::new(successes, trials, seed, clopper_pearson))
}

/// Witnesses of the first successful trials, at most `max`, scanning trials in order.
pub fn witnesses(h: &Hierarchy, j: u32, comp: usize, trials: u64, seed: u64, max: usize) -> Result<Vec<(u64, Witness)>> {
    let exp = STrial::new(h, j, comp)?;
    let mut out = Vec::new();
    for t in 0..trials {
        if out.len() >= max {
            break;
        }
        if let Some(w) = exp.witness(trial_seed(seed, t))? {
            out.push((t, w));
        }
    }
    Ok(out)
}

/// Site window of a run: the level-1 window `w1` if given, else `cells` level-0 cells.
pub fn site_window(family: Family, params: &ParameterSet, w1: Option<Rect>, cells: (u32, u32)) -> Result<Rect> {
    if let Some(w1) = w1 {
        return Ok(site_window_for(family, w1, params)?);
    }
    let s = match family {
        Family::X => 1,
        Family::Y => params.m0 as i64,
    };
    Ok(Rect::new(0, 0, cells.0 as i64 * s, cells.1 as i64 * s))
}

/// Samples and builds one window.
pub fn build_window(family: Family, params: &ParameterSet, sites: Rect, seed: u64, depth: u32) -> Result<Hierarchy> {
    let f = lipembed_core::fields::sample_field(seed, family, Point::new(sites.x0, sites.y0), sites.width() as u32, sites.height() as u32, params.field_cap())?;
    Ok(build(f, params, depth)?)
}

/// Report inputs gathered from many independent windows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Survey {
    /// `(S, V)` of every uncensored component at the report level.
    pub samples: Vec<(f64, u64)>,
    pub sizes: Vec<u64>,
    /// Goodness of every uncensored block, per level.
    pub good: Vec<(u32, Vec<bool>)>,
}

/// Embedding probability of a component: 1 for good singletons, the exact value when
/// known, else a `s_trials` Monte Carlo estimate.
pub fn component_s(h: &Hierarchy, j: u32, comp: usize, s_trials: u64, seed: u64) -> Result<f64> {
    let c = &h.level(j).components[comp];
    if c.status == Status::GoodSingleton {
        return Ok(1.0);
    }
    match &c.s_value {
        Some(SValue::Exact(q)) => Ok(q.to_f64().unwrap_or(0.0)),
        Some(SValue::Estimate { successes, trials, .. }) => Ok(*successes as f64 / *trials as f64),
        None => Ok(estimate_s(h, j, comp, s_trials.max(1), seed, 1)?.estimate),
    }
}

/// Builds `windows` independent windows (window `w` sampled with `trial_seed(seed, w)`)
/// and collects report samples at level `j`.
#[allow(clippy::too_many_arguments)]
pub fn survey(family: Family, params: &ParameterSet, sites: Rect, depth: u32, j: u32, windows: u64, seed: u64, s_trials: u64, workers: usize) -> Result<Survey> {
    if j > depth {
        return Err(Error::Config(format!("report level {j} exceeds depth {depth}")));
    }
    let per = par_map(workers, windows, |w| -> Result<Survey> {
        let ws = trial_seed(seed, w);
        let h = build_window(family, params, sites, ws, depth)?;
        let mut s = Survey::default();
        for (i, c) in h.level(j).components.iter().enumerate() {
            if c.censored {
                continue;
            }
            s.samples.push((component_s(&h, j, i, s_trials, trial_seed(ws, i as u64))?, c.size() as u64));
            s.sizes.push(c.size() as u64);
        }
        for l in &h.levels {
            s.good.push((l.level, l.blocks.iter().filter(|b| !b.censored).map(|b| b.good).collect()));
        }
        Ok(s)
    })?;
    let mut all = Survey { good: (0..=depth).map(|l| (l, Vec::new())).collect(), ..Survey::default() };
    for s in per {
        let s = s?;
        all.samples.extend(s.samples);
        all.sizes.extend(s.sizes);
        for (l, g) in s.good {
            all.good[l as usize].1.extend(g);
        }
    }
    Ok(all)
}
