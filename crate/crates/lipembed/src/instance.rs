//! Oracle instance files and result records.
//!
//! An instance file is a header line `lipembed-instance 1 m=<M> mode=<decide|count|enumerate>`
//! followed by the X field and then the Y field, each in the field file format.

use std::io::{BufRead, Write};

use lipembed_core::oracle::{Instance, Mode, OracleResult};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::format::{read_field, write_field};

pub const INSTANCE_VERSION: u32 = 1;

pub fn mode_from_str(s: &str) -> Result<Mode> {
    match s {
        "decide" => Ok(Mode::Decide),
        "count" => Ok(Mode::Count),
        "enumerate" => Ok(Mode::Enumerate),
        _ => Err(Error::Config(format!("unknown oracle mode `{s}`"))),
    }
}

pub fn write_instance(w: &mut impl Write, inst: &Instance) -> std::io::Result<()> {
    writeln!(w, "lipembed-instance {INSTANCE_VERSION} m={} mode={}", inst.m, inst.mode.as_str())?;
    write_field(w, &inst.x)?;
    write_field(w, &inst.y)
}

pub fn instance_bytes(inst: &Instance) -> Vec<u8> {
    let mut v = Vec::new();
    write_instance(&mut v, inst).expect("writing to a Vec");
    v
}

pub fn read_instance(r: &mut impl BufRead) -> Result<Instance> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| Error::Format(e.to_string()))?;
    let mut parts = line.trim_end().split(' ');
    if parts.next() != Some("lipembed-instance") || parts.next() != Some("1") {
        return Err(Error::Format("not a version-1 instance file".into()));
    }
    let (mut m, mut mode) = (None, None);
    for kv in parts {
        match kv.split_once('=') {
            Some(("m", v)) => m = v.parse::<f64>().ok().filter(|m| *m >= 0.0 && m.is_finite()),
            Some(("mode", v)) => mode = Some(mode_from_str(v).map_err(|e| Error::Format(e.to_string()))?),
            _ => return Err(Error::Format(format!("bad instance header item `{kv}`"))),
        }
    }
    let m = m.ok_or_else(|| Error::Format("instance header lacks a valid m".into()))?;
    let mode = mode.ok_or_else(|| Error::Format("instance header lacks mode".into()))?;
    let x = read_field(r)?;
    let y = read_field(r)?;
    Ok(Instance { x, y, m, mode })
}

/// Structured result: decision, witness (first map), count, node statistics.
pub fn result_record(name: &str, inst: &Instance, res: &OracleResult) -> Value {
    let map = |m: &lipembed_core::embed::EmbeddingMap| Value::Array(m.phi.iter().map(|(a, b)| json!([a.x, a.y, b.x, b.y])).collect());
    json!({
        "schema": "lipembed-oracle/1",
        "instance": name,
        "mode": inst.mode.as_str(),
        "m": inst.m,
        "exists": res.exists,
        "count": res.count,
        "nodes": res.nodes,
        "witness": res.maps.first().map(map),
        "maps": if inst.mode == Mode::Enumerate { Value::Array(res.maps.iter().map(map).collect()) } else { Value::Null },
    })
}
