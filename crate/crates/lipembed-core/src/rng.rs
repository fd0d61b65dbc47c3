//! Counter-based randomness.
//!
//! ChaCha8 is used in counter mode: the key encodes (seed, domain, level), the 64-bit
//! stream selects a lattice row or an object id, and the word position selects a block
//! of output. Any value is therefore a pure function of its coordinates, so two
//! overlapping windows (or two workers) always see the same bits.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const TAG_FIELD: u8 = 1;
pub const TAG_CURVE_VERTEX: u8 = 2;
pub const TAG_CURVE_EDGE: u8 = 3;
pub const TAG_TRIAL: u8 = 4;
pub const TAG_MISC: u8 = 5;

/// Bits per ChaCha block.
const BLOCK_BITS: i64 = 512;

fn key(seed: u64, tag: u8, sub: u8, level: u8) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8] = tag;
    k[9] = sub;
    k[10] = level;
    k[16..24].copy_from_slice(b"lipembed");
    k
}

/// Packs a lattice point into a stream id; injective for coordinates in i32 range.
pub fn pack(x: i64, y: i64) -> u64 {
    ((x as i32 as u32 as u64) << 32) | (y as i32 as u32 as u64)
}

/// A generator positioned at the start of object `stream` within `(seed, tag, sub, level)`.
pub fn keyed(seed: u64, tag: u8, sub: u8, level: u8, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, tag, sub, level));
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` (n >= 1) by rejection.
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    debug_assert!(n > 0);
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % n;
        }
    }
}

/// Seed of trial `t` under master seed `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    keyed(seed, TAG_TRIAL, 0, 0, t).next_u64()
}

/// Fills `out` with the field bits of row `y`, columns `x0 .. x0 + out.len()`.
/// Bit (x, y) is bit `x mod 512` of ChaCha block `floor(x / 512)` on stream `y`.
pub fn field_row(seed: u64, family: u8, y: i64, x0: i64, out: &mut [u8]) {
    if out.is_empty() {
        return;
    }
    let mut rng = ChaCha8Rng::from_seed(key(seed, TAG_FIELD, family, 0));
    rng.set_stream(y as u64);
    let x1 = x0 + out.len() as i64;
    let mut block = x0.div_euclid(BLOCK_BITS);
    let mut words = [0u64; 8];
    while block * BLOCK_BITS < x1 {
        // word_pos counts 32-bit words; one block is 16 words.
        let pos = ((block as i128) + (1i128 << 62)) as u128 * 16;
        rng.set_word_pos(pos);
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        let start = (block * BLOCK_BITS).max(x0);
        let end = ((block + 1) * BLOCK_BITS).min(x1);
        for x in start..end {
            let off = (x - block * BLOCK_BITS) as usize;
            out[(x - x0) as usize] = ((words[off / 64] >> (off % 64)) & 1) as u8;
        }
        block += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_agree_on_overlap() {
        let mut a = [0u8; 700];
        let mut b = [0u8; 300];
        field_row(9, 0, -3, -600, &mut a);
        field_row(9, 0, -3, -200, &mut b);
        assert_eq!(&a[400..700], &b[..]);
    }

    #[test]
    fn pack_is_injective_on_small_box() {
        let mut seen = alloc::collections::BTreeSet::new();
        for x in -5..5 {
            for y in -5..5 {
                assert!(seen.insert(pack(x, y)));
            }
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = keyed(1, TAG_MISC, 0, 0, 0);
        for _ in 0..1000 {
            assert!(below(&mut r, 7) < 7);
        }
    }
}
