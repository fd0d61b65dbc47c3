//! `lipembed` subcommands. Every option can come from a `--config` key-value file or a
//! flag; flags win. Exit status: 0 ok, 1 config, 2 precondition, 3 resource cap.

use std::ffi::OsString;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lipembed_core::hierarchy::{build, Hierarchy, MAX_DEPTH};
use lipembed_core::oracle::{solve, Instance, Limits};
use lipembed_core::params::check_constraints;
use lipembed_core::rng::{below, keyed, TAG_MISC};
use lipembed_core::stats::{default_x_grid, good_prob_report, size_report, tail_report};
use lipembed_core::{BitField, Family, Point};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::format::{family_from_str, field_bytes, read_field};
use crate::manifest::Outputs;
use crate::report::Table;
use crate::{drive, dump, instance, render, report};

#[derive(Parser, Debug)]
#[command(name = "lipembed", version, about = "Multi-scale Lipschitz embedding laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Key-value config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bundled profile (`toy`, `reference`) or a profile file.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Threads for Monte Carlo trials; outputs do not depend on it.
    #[arg(long)]
    pub workers: Option<String>,
    /// Comma-separated subset of `csv,jsonl`.
    #[arg(long)]
    pub formats: Option<String>,
    /// Profile override, e.g. `--param m0=6`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Args, Debug, Default)]
pub struct WindowArgs {
    /// `X` or `Y`.
    #[arg(long)]
    pub family: Option<String>,
    /// Level-1 window `x0,y0,x1,y1`; the site window is sized to build it.
    #[arg(long)]
    pub window: Option<String>,
    /// Level-0 window `WxH` in cells, used when no level-1 window is given.
    #[arg(long)]
    pub cells: Option<String>,
    /// Read the field from a file instead of sampling it.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Sample a field window and write it.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
    },
    /// Build the hierarchy of a window and dump it.
    Build {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
    },
    /// List the components of every built level.
    Components {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
    },
    /// Estimate the embedding probability of one component.
    EstimateS {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        level: Option<String>,
        /// Component id at `level`.
        #[arg(long)]
        component: Option<String>,
        /// Any cell `x,y` of the component.
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        /// Dump witnesses of up to this many successful trials.
        #[arg(long)]
        witnesses: Option<String>,
    },
    /// Tail, size and good-block tables over many windows.
    Reports {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        windows: Option<String>,
        /// Trials per bad component when S is not known exactly.
        #[arg(long)]
        s_trials: Option<String>,
    },
    /// Run the exact embedding oracle on instance files or random instances.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: Option<String>,
        /// Number of random instances to generate and solve.
        #[arg(long)]
        random: Option<String>,
        #[arg(long)]
        x_size: Option<String>,
        #[arg(long)]
        y_size: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        node_budget: Option<String>,
    },
    /// Check a profile against the constraint system.
    AuditParams {
        #[command(flatten)]
        common: Common,
    },
    /// Draw one level of a built window as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        win: WindowArgs,
        #[arg(long)]
        level: Option<String>,
    },
}

fn push(v: &mut Vec<(String, String)>, k: &str, x: &Option<String>) {
    if let Some(x) = x {
        v.push((k.to_string(), x.clone()));
    }
}

impl Common {
    fn flags(&self, v: &mut Vec<(String, String)>) -> Result<()> {
        push(v, "profile", &self.profile);
        push(v, "seed", &self.seed);
        push(v, "out", &self.out);
        push(v, "workers", &self.workers);
        push(v, "formats", &self.formats);
        for p in &self.params {
            let (k, x) = p.split_once('=').ok_or_else(|| Error::Config(format!("--param expects NAME=VALUE, got `{p}`")))?;
            v.push((format!("param.{}", k.trim()), x.trim().to_string()));
        }
        Ok(())
    }
}

impl WindowArgs {
    fn flags(&self, v: &mut Vec<(String, String)>) {
        push(v, "family", &self.family);
        push(v, "window", &self.window);
        push(v, "cells", &self.cells);
        push(v, "field", &self.field);
        push(v, "depth", &self.depth);
    }
}

pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Cmd) -> Result<()> {
    let mut f = Vec::new();
    let (name, common) = match &cmd {
        Cmd::Sample { common, win } | Cmd::Build { common, win } | Cmd::Components { common, win } => {
            win.flags(&mut f);
            let n = match cmd {
                Cmd::Sample { .. } => "sample",
                Cmd::Build { .. } => "build",
                _ => "components",
            };
            (n, common)
        }
        Cmd::EstimateS { common, win, level, component, at, trials, witnesses } => {
            win.flags(&mut f);
            push(&mut f, "level", level);
            push(&mut f, "component", component);
            push(&mut f, "at", at);
            push(&mut f, "trials", trials);
            push(&mut f, "witnesses", witnesses);
            ("estimate-s", common)
        }
        Cmd::Reports { common, win, level, windows, s_trials } => {
            win.flags(&mut f);
            push(&mut f, "level", level);
            push(&mut f, "windows", windows);
            push(&mut f, "s_trials", s_trials);
            ("reports", common)
        }
        Cmd::Oracle { common, instance, random, x_size, y_size, m, mode, node_budget } => {
            push(&mut f, "instance", instance);
            push(&mut f, "random", random);
            push(&mut f, "x_size", x_size);
            push(&mut f, "y_size", y_size);
            push(&mut f, "m", m);
            push(&mut f, "mode", mode);
            push(&mut f, "node_budget", node_budget);
            ("oracle", common)
        }
        Cmd::AuditParams { common } => ("audit-params", common),
        Cmd::Render { common, win, level } => {
            win.flags(&mut f);
            push(&mut f, "level", level);
            ("render", common)
        }
    };
    let mut flags = Vec::new();
    common.flags(&mut flags)?;
    flags.extend(f);
    let cfg = RunConfig::resolve(common.config.as_deref(), &flags)?;
    execute(name, &cfg)
}

/// Runs subcommand `name` under a resolved configuration.
pub fn execute(name: &str, cfg: &RunConfig) -> Result<()> {
    cfg.workers()?;
    let (csv, jsonl) = cfg.formats()?;
    let mut out = Outputs::new(cfg.str("out").unwrap_or("lipembed-out"))?;
    let tables = |out: &mut Outputs, t: &Table| -> Result<()> {
        if csv {
            out.write(&format!("{}.csv", t.name), t.to_csv().as_bytes())?;
        }
        if jsonl {
            out.write(&format!("{}.jsonl", t.name), t.to_jsonl().as_bytes())?;
        }
        Ok(())
    };
    match name {
        "sample" => {
            let f = field(cfg, 0)?;
            out.write(&format!("field-{}.lpf", f.family), &field_bytes(&f))?;
        }
        "build" => {
            let h = hierarchy(cfg, 1)?;
            out.write("hierarchy.jsonl", dump::hierarchy_dump(&h).as_bytes())?;
        }
        "components" => {
            let h = hierarchy(cfg, 1)?;
            tables(&mut out, &report::components_table(&h))?;
        }
        "estimate-s" => {
            let j: u32 = cfg.get("level", 0)?;
            let h = hierarchy(cfg, j)?;
            if j > h.depth() {
                return Err(Error::Config(format!("level {j} exceeds depth {}", h.depth())));
            }
            let comp = pick_component(cfg, &h, j)?;
            let (trials, seed) = (cfg.get("trials", 1000u64)?, cfg.seed()?);
            let e = drive::estimate_s(&h, j, comp, trials, seed, cfg.workers()?)?;
            tables(&mut out, &report::estimate_table(&h, j, comp, &e))?;
            let nw: usize = cfg.get("witnesses", 0)?;
            if nw > 0 {
                let ws = drive::witnesses(&h, j, comp, trials, seed, nw)?;
                let recs: Vec<_> = ws.iter().map(|(t, w)| dump::witness_record(w, Some(*t))).collect();
                out.write("witnesses.jsonl", dump::to_jsonl(&recs).as_bytes())?;
            }
            println!("component {comp}: {} / {} = {} [{}, {}]", e.successes, e.trials, e.estimate, e.ci_low, e.ci_high);
        }
        "reports" => {
            let j: u32 = cfg.get("level", 0)?;
            let depth: u32 = cfg.get("depth", j)?;
            check_depth(depth)?;
            let family = family_from_str(cfg.str("family").unwrap_or("Y"))?;
            let p = &cfg.params;
            let sites = drive::site_window(family, p, cfg.rect("window")?, cfg.size("cells", (32, 32))?)?;
            let s = drive::survey(family, p, sites, depth, j, cfg.get("windows", 20)?, cfg.seed()?, cfg.get("s_trials", 50)?, cfg.workers()?)?;
            let vmax = s.samples.iter().map(|x| x.1).max().unwrap_or(1).max(1);
            let vs: Vec<u64> = (1..=vmax).collect();
            if s.samples.is_empty() {
                eprintln!("note: no uncensored level-{j} components in any window; tail and size tables skipped");
            } else {
                tables(&mut out, &report::tail_table(&tail_report(&s.samples, &default_x_grid(p, j), &vs, p, j)?))?;
                tables(&mut out, &report::size_table(&size_report(&s.sizes, p, j)?))?;
            }
            let groups: Vec<_> = s.good.into_iter().filter(|g| !g.1.is_empty()).map(|(l, g)| (family, l, g)).collect();
            tables(&mut out, &report::good_table(&good_prob_report(&groups, p, crate::ci::clopper_pearson)?))?;
        }
        "oracle" => oracle(cfg, &mut out)?,
        "audit-params" => {
            let r = check_constraints(&cfg.params);
            print!("{}", report::audit_text(&r));
            tables(&mut out, &report::audit_table(&r))?;
        }
        "render" => {
            let depth: u32 = cfg.get("depth", cfg.get("level", 1)?)?;
            let j: u32 = cfg.get("level", depth)?;
            let h = hierarchy(cfg, depth)?;
            out.write(&format!("level{j}.svg"), render::render_level(&h, j)?.as_bytes())?;
        }
        other => return Err(Error::Config(format!("unknown command `{other}`"))),
    }
    for a in &out.written {
        println!("wrote {}", out.dir.join(&a.path).display());
    }
    let m = out.finish(name, cfg)?;
    println!("wrote {}", m.display());
    Ok(())
}

fn check_depth(d: u32) -> Result<()> {
    if d > MAX_DEPTH {
        return Err(Error::Config(format!("depth {d} exceeds the supported maximum {MAX_DEPTH}")));
    }
    Ok(())
}

/// The run's field: read from `field`, or sampled over the configured window.
fn field(cfg: &RunConfig, default_depth: u32) -> Result<BitField> {
    if let Some(path) = cfg.str("field") {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        return read_field(&mut BufReader::new(file));
    }
    let family = family_from_str(cfg.str("family").unwrap_or("Y"))?;
    let p = &cfg.params;
    let depth: u32 = cfg.get("depth", default_depth)?;
    let w1 = match cfg.rect("window")? {
        Some(w) => Some(w),
        None if depth >= 1 && cfg.str("cells").is_none() => Some(lipembed_core::Rect::new(0, 0, 3, 3)),
        None => None,
    };
    let sites = drive::site_window(family, p, w1, cfg.size("cells", (32, 32))?)?;
    Ok(lipembed_core::fields::sample_field(cfg.seed()?, family, Point::new(sites.x0, sites.y0), sites.width() as u32, sites.height() as u32, p.field_cap())?)
}

fn hierarchy(cfg: &RunConfig, default_depth: u32) -> Result<Hierarchy> {
    let depth: u32 = cfg.get("depth", default_depth)?;
    check_depth(depth)?;
    let f = field(cfg, default_depth)?;
    Ok(build(f, &cfg.params, depth)?)
}

fn pick_component(cfg: &RunConfig, h: &Hierarchy, j: u32) -> Result<usize> {
    let l = h.level(j);
    if let Some(c) = cfg.str("component") {
        let c: usize = c.parse().map_err(|_| Error::Config(format!("bad component `{c}`")))?;
        return if c < l.components.len() { Ok(c) } else { Err(Error::Precondition(format!("no component {c} at level {j}"))) };
    }
    if let Some(p) = cfg.point("at")? {
        return l.component_at(p).map(|_| l.comp_of[p] as usize).ok_or_else(|| Error::Precondition(format!("{p} outside the level-{j} window")));
    }
    l.components
        .iter()
        .position(|c| c.status.is_bad() && !c.censored)
        .ok_or_else(|| Error::Precondition(format!("no uncensored bad component at level {j}; pass component or at")))
}

fn oracle(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let mut limits = Limits::default();
    limits.node_budget = cfg.get("node_budget", limits.node_budget)?;
    let mut insts: Vec<(String, Instance)> = Vec::new();
    if let Some(paths) = cfg.str("instance") {
        for path in paths.split(',') {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            insts.push((path.to_string(), instance::read_instance(&mut BufReader::new(file))?));
        }
    }
    let n: u64 = cfg.get("random", 0)?;
    if n > 0 {
        let (xw, xh) = cfg.size("x_size", (2, 2))?;
        let (yw, yh) = cfg.size("y_size", (5, 5))?;
        let m: f64 = cfg.get("m", 2.0)?;
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::Config("`m` must be a finite number >= 0".into()));
        }
        let mode = instance::mode_from_str(cfg.str("mode").unwrap_or("decide"))?;
        let seed = cfg.seed()?;
        for i in 0..n {
            let mk = |family: Family, w: u32, h: u32| {
                let mut r = keyed(seed, TAG_MISC, 9, 0, i * 2 + family.tag() as u64);
                BitField::from_bits(family, Point::new(0, 0), w, h, seed, (0..w * h).map(|_| below(&mut r, 2) as u8).collect())
            };
            let inst = Instance { x: mk(Family::X, xw, xh)?, y: mk(Family::Y, yw, yh)?, m, mode };
            let name = format!("instances/{i:05}.inst");
            out.write(&name, &instance::instance_bytes(&inst))?;
            insts.push((name, inst));
        }
    }
    if insts.is_empty() {
        return Err(Error::Config("oracle needs `instance` paths or `random` > 0".into()));
    }
    let solved = drive::par_map(cfg.workers()?, insts.len() as u64, |i| solve(&insts[i as usize].1, limits))?;
    let mut recs = Vec::new();
    for ((name, inst), r) in insts.iter().zip(solved) {
        recs.push(instance::result_record(name, inst, &r?));
    }
    out.write("results.jsonl", dump::to_jsonl(&recs).as_bytes())?;
    Ok(())
}
