//! Field and shape files.
//!
//! A field file is one ASCII header line
//!
//! ```text
//! lipembed-field 1 family=Y origin=-4,0 width=30 height=20 seed=7
//! ```
//!
//! followed by `ceil(width * height / 8)` bytes: sites in row-major order (row `y0`
//! first), 8 per byte, site `8k + i` in bit `i` of byte `k`. Padding bits are zero.

use std::io::{BufRead, Write};

use lipembed_core::{BitField, Family, Point};

use crate::error::{Error, Result};

pub const FIELD_FORMAT_VERSION: u32 = 1;
const FIELD_MAGIC: &str = "lipembed-field";

pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

pub fn unpack_bits(bytes: &[u8], n: usize) -> Vec<u8> {
    (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1).collect()
}

pub fn family_from_str(s: &str) -> Result<Family> {
    match s {
        "X" | "x" => Ok(Family::X),
        "Y" | "y" => Ok(Family::Y),
        _ => Err(Error::Config(format!("unknown family `{s}`"))),
    }
}

pub fn field_header(f: &BitField) -> String {
    format!(
        "{FIELD_MAGIC} {FIELD_FORMAT_VERSION} family={} origin={},{} width={} height={} seed={}",
        f.family, f.origin.x, f.origin.y, f.width, f.height, f.seed
    )
}

pub fn write_field(w: &mut impl Write, f: &BitField) -> std::io::Result<()> {
    writeln!(w, "{}", field_header(f))?;
    w.write_all(&pack_bits(&f.bits))
}

pub fn field_bytes(f: &BitField) -> Vec<u8> {
    let mut v = Vec::new();
    write_field(&mut v, f).expect("writing to a Vec");
    v
}

fn bad(s: impl Into<String>) -> Error {
    Error::Format(s.into())
}

pub fn parse_point(s: &str) -> Option<Point> {
    let (a, b) = s.split_once(',')?;
    Some(Point::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Reads one field, leaving the reader just past its packed bytes.
pub fn read_field(r: &mut impl BufRead) -> Result<BitField> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line).map_err(|e| bad(e.to_string()))?;
    let line = std::str::from_utf8(&line).map_err(|_| bad("header is not UTF-8"))?.trim_end();
    let mut parts = line.split(' ');
    if parts.next() != Some(FIELD_MAGIC) {
        return Err(bad("not a field file"));
    }
    let version: u32 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("missing format version"))?;
    if version != FIELD_FORMAT_VERSION {
        return Err(bad(format!("unsupported field format version {version}")));
    }
    let (mut family, mut origin, mut width, mut height, mut seed) = (None, None, None, None, None);
    for kv in parts {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad header item `{kv}`")))?;
        match k {
            "family" => family = Some(family_from_str(v).map_err(|_| bad(format!("bad family `{v}`")))?),
            "origin" => origin = parse_point(v),
            "width" => width = v.parse::<u32>().ok(),
            "height" => height = v.parse::<u32>().ok(),
            "seed" => seed = v.parse::<u64>().ok(),
            _ => return Err(bad(format!("unknown header key `{k}`"))),
        }
    }
    let missing = |n: &str| bad(format!("header lacks a valid `{n}`"));
    let (family, origin) = (family.ok_or_else(|| missing("family"))?, origin.ok_or_else(|| missing("origin"))?);
    let (width, height, seed) = (width.ok_or_else(|| missing("width"))?, height.ok_or_else(|| missing("height"))?, seed.ok_or_else(|| missing("seed"))?);
    let n = width as usize * height as usize;
    let mut bytes = vec![0u8; n.div_ceil(8)];
    r.read_exact(&mut bytes).map_err(|_| bad("truncated bit data"))?;
    if n % 8 != 0 && bytes[n / 8] >> (n % 8) != 0 {
        return Err(bad("nonzero padding bits"));
    }
    Ok(BitField::from_bits(family, origin, width, height, seed, unpack_bits(&bytes, n))?)
}

/// A shape or animal as one line of sorted `x,y` pairs.
pub fn shape_line(points: &[Point]) -> String {
    let mut p = points.to_vec();
    p.sort();
    p.iter().map(|q| format!("{},{}", q.x, q.y)).collect::<Vec<_>>().join(" ")
}

pub fn parse_shape_line(s: &str) -> Result<Vec<Point>> {
    let pts = s.split_whitespace().map(|t| parse_point(t).ok_or_else(|| bad(format!("bad point `{t}`")))).collect::<Result<Vec<_>>>()?;
    if pts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("shape points must be strictly sorted"));
    }
    Ok(pts)
}
