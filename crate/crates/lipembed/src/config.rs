//! Run configuration: bundled or file parameter profiles, key-value config files and
//! flag overrides (flags win).

use std::collections::BTreeMap;
use std::path::Path;

use lipembed_core::params::Knobs;
use lipembed_core::{ParameterSet, Rect};

use crate::error::{Error, Result};
use crate::format::parse_point;

pub const REFERENCE_PROFILE: &str = include_str!("../profiles/reference.profile");
pub const TOY_PROFILE: &str = include_str!("../profiles/toy.profile");

/// Keys accepted in config files and on the command line. `param.<name>` overrides a
/// profile entry.
pub const KEYS: &[&str] = &[
    "profile", "seed", "out", "workers", "formats", "family", "window", "cells", "field", "depth", "level", "component",
    "at", "trials", "windows", "s_trials", "witnesses", "m", "mode", "instance", "random", "x_size", "y_size",
    "node_budget",
];

/// `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("`{k}`: cannot parse `{v}`")))
}

fn list<T: std::str::FromStr>(k: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|t| num(k, t.trim())).collect()
}

/// Applies one profile entry.
pub fn set_param(p: &mut ParameterSet, k: &str, v: &str) -> Result<()> {
    let kn = &mut p.knobs;
    match k {
        "alpha" => p.alpha = num(k, v)?,
        "beta" => p.beta = num(k, v)?,
        "gamma" => p.gamma = num(k, v)?,
        "m" => p.m = num(k, v)?,
        "k0" => p.k0 = num(k, v)?,
        "v0" => p.v0 = num(k, v)?,
        "l0" => p.l0 = num(k, v)?,
        "m0" => p.m0 = num(k, v)?,
        "lipschitz" => p.lipschitz = num(k, v)?,
        "margin" => kn.margin = Some(num(k, v)?),
        "clearance" => kn.clearance = Some(num(k, v)?),
        "boundary_margin" => kn.boundary_margin = Some(num(k, v)?),
        "interior_margin" => kn.interior_margin = Some(num(k, v)?),
        "corner_shift" => kn.corner_shift = Some(num(k, v)?),
        "corner_radii" => kn.corner_radii = Some(list(k, v)?),
        "tracks" => kn.tracks = Some(list(k, v)?),
        "airport_side" => kn.airport_side = Some(num(k, v)?),
        "h_range" => kn.h_range = Some(num(k, v)?),
        "field_cap" => kn.field_cap = Some(num(k, v)?),
        "shape_cap" => kn.shape_cap = Some(num(k, v)?),
        _ => return Err(Error::Config(format!("unknown parameter `{k}`"))),
    }
    Ok(())
}

pub fn parse_profile(text: &str) -> Result<ParameterSet> {
    let mut p = ParameterSet { alpha: 0.0, beta: 0.0, gamma: 0.0, m: 0.0, k0: 0, v0: 0, l0: 0, m0: 0, lipschitz: 0.0, knobs: Knobs::default() };
    for (k, v) in parse_kv(text)? {
        set_param(&mut p, &k, &v)?;
    }
    p.validate()?;
    Ok(p)
}

/// Canonical text of a parameter set: every field, fixed order, unset knobs omitted.
pub fn profile_text(p: &ParameterSet) -> String {
    let mut s = format!(
        "alpha = {}\nbeta = {}\ngamma = {}\nm = {}\nk0 = {}\nv0 = {}\nl0 = {}\nm0 = {}\nlipschitz = {}\n",
        p.alpha, p.beta, p.gamma, p.m, p.k0, p.v0, p.l0, p.m0, p.lipschitz
    );
    let k = &p.knobs;
    let join = |v: &[String]| v.join(",");
    let mut opt = |name: &str, v: Option<String>| {
        if let Some(v) = v {
            s.push_str(&format!("{name} = {v}\n"));
        }
    };
    opt("margin", k.margin.map(|v| v.to_string()));
    opt("clearance", k.clearance.map(|v| v.to_string()));
    opt("boundary_margin", k.boundary_margin.map(|v| v.to_string()));
    opt("interior_margin", k.interior_margin.map(|v| v.to_string()));
    opt("corner_shift", k.corner_shift.map(|v| v.to_string()));
    opt("corner_radii", k.corner_radii.as_ref().map(|v| join(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>())));
    opt("tracks", k.tracks.as_ref().map(|v| join(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>())));
    opt("airport_side", k.airport_side.map(|v| v.to_string()));
    opt("h_range", k.h_range.map(|v| v.to_string()));
    opt("field_cap", k.field_cap.map(|v| v.to_string()));
    opt("shape_cap", k.shape_cap.map(|v| v.to_string()));
    s
}

pub fn load_profile(name: &str) -> Result<ParameterSet> {
    match name {
        "reference" => parse_profile(REFERENCE_PROFILE),
        "toy" => parse_profile(TOY_PROFILE),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("profile `{path}`: {e}")))?;
            parse_profile(&text)
        }
    }
}

/// Resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub values: BTreeMap<String, String>,
    pub params: ParameterSet,
}

impl RunConfig {
    /// Merges `file` (if any) under `flags`; later entries win.
    pub fn resolve(file: Option<&Path>, flags: &[(String, String)]) -> Result<Self> {
        let mut entries = Vec::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("config `{}`: {e}", path.display())))?;
            entries.extend(parse_kv(&text)?);
        }
        entries.extend(flags.iter().cloned());
        let mut values = BTreeMap::new();
        for (k, v) in entries {
            if !KEYS.contains(&k.as_str()) && !k.starts_with("param.") {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            values.insert(k, v);
        }
        let mut params = load_profile(values.get("profile").map(String::as_str).unwrap_or("toy"))?;
        for (k, v) in &values {
            if let Some(name) = k.strip_prefix("param.") {
                set_param(&mut params, name, v)?;
            }
        }
        params.validate()?;
        Ok(RunConfig { values, params })
    }

    pub fn str(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, k: &str, default: T) -> Result<T> {
        match self.str(k) {
            Some(v) => num(k, v),
            None => Ok(default),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, k: &str) -> Result<T> {
        num(k, self.str(k).ok_or_else(|| Error::Config(format!("`{k}` is required")))?)
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed", 0)
    }

    pub fn workers(&self) -> Result<usize> {
        let w = self.get("workers", 1usize)?;
        if w == 0 {
            return Err(Error::Config("`workers` must be >= 1".into()));
        }
        Ok(w)
    }

    /// `x0,y0,x1,y1`.
    pub fn rect(&self, k: &str) -> Result<Option<Rect>> {
        let Some(v) = self.str(k) else { return Ok(None) };
        let n: Vec<i64> = list(k, v)?;
        match n[..] {
            [x0, y0, x1, y1] if x1 > x0 && y1 > y0 => Ok(Some(Rect::new(x0, y0, x1, y1))),
            _ => Err(Error::Config(format!("`{k}` must be x0,y0,x1,y1 with x1 > x0, y1 > y0"))),
        }
    }

    /// `WxH`.
    pub fn size(&self, k: &str, default: (u32, u32)) -> Result<(u32, u32)> {
        let Some(v) = self.str(k) else { return Ok(default) };
        let bad = || Error::Config(format!("`{k}` must be WxH"));
        let (a, b) = v.split_once('x').ok_or_else(bad)?;
        let (w, h) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if w == 0 || h == 0 {
            return Err(bad());
        }
        Ok((w, h))
    }

    pub fn point(&self, k: &str) -> Result<Option<lipembed_core::Point>> {
        let Some(v) = self.str(k) else { return Ok(None) };
        parse_point(v).map(Some).ok_or_else(|| Error::Config(format!("`{k}` must be x,y")))
    }

    pub fn formats(&self) -> Result<(bool, bool)> {
        let v = self.str("formats").unwrap_or("csv,jsonl");
        let (mut csv, mut jsonl) = (false, false);
        for f in v.split(',') {
            match f.trim() {
                "csv" => csv = true,
                "jsonl" => jsonl = true,
                o => return Err(Error::Config(format!("unknown format `{o}`"))),
            }
        }
        Ok((csv, jsonl))
    }

    /// Everything that determines the outputs, in canonical form.
    pub fn canonical(&self, command: &str) -> String {
        let mut s = format!("command = {command}\n");
        for (k, v) in &self.values {
            if k != "out" && k != "workers" {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s.push_str("[profile]\n");
        s.push_str(&profile_text(&self.params));
        s
    }
}
