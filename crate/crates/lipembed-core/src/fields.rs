//! Bernoulli(1/2) field windows and level-0 block classification.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lattice::{Point, Rect};
use crate::params::ParameterSet;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    X,
    Y,
}

impl Family {
    pub fn tag(self) -> u8 {
        match self {
            Family::X => 0,
            Family::Y => 1,
        }
    }
    pub fn partner(self) -> Family {
        match self {
            Family::X => Family::Y,
            Family::Y => Family::X,
        }
    }
    pub fn letter(self) -> char {
        match self {
            Family::X => 'X',
            Family::Y => 'Y',
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A finite window of site values. Site `(x, y)` is the offset `(x, y)` from the field's base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitField {
    pub family: Family,
    pub origin: Point,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    /// Row-major, one byte (0 or 1) per site.
    pub bits: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    EmptyWindow,
    TooLarge { bits: u64, cap: u64 },
    WrongBitCount { expected: usize, got: usize },
    OutsideWindow(Point),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::EmptyWindow => write!(f, "window must be at least 1x1"),
            FieldError::TooLarge { bits, cap } => write!(f, "window of {bits} bits exceeds cap {cap}"),
            FieldError::WrongBitCount { expected, got } => write!(f, "expected {expected} bits, got {got}"),
            FieldError::OutsideWindow(p) => write!(f, "site {p} outside window"),
        }
    }
}

impl BitField {
    pub fn rect(&self) -> Rect {
        Rect::new(self.origin.x, self.origin.y, self.origin.x + self.width as i64, self.origin.y + self.height as i64)
    }
    pub fn contains(&self, p: Point) -> bool {
        self.rect().contains(p)
    }
    pub fn get(&self, p: Point) -> Option<u8> {
        if self.contains(p) {
            Some(self.bits[self.rect().offset(p)])
        } else {
            None
        }
    }
    pub fn bit(&self, p: Point) -> u8 {
        self.get(p).unwrap_or_else(|| panic!("site {p} outside field window"))
    }
    /// A window with explicit bits (tests, instance files).
    pub fn from_bits(family: Family, origin: Point, width: u32, height: u32, seed: u64, bits: Vec<u8>) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::EmptyWindow);
        }
        let n = width as usize * height as usize;
        if bits.len() != n {
            return Err(FieldError::WrongBitCount { expected: n, got: bits.len() });
        }
        Ok(BitField { family, origin, width, height, seed, bits: bits.into_iter().map(|b| b & 1).collect() })
    }
}

/// Samples a window; each bit is a pure function of `(seed, family, absolute site)`.
pub fn sample_field(seed: u64, family: Family, origin: Point, width: u32, height: u32, cap: u64) -> Result<BitField, FieldError> {
    if width == 0 || height == 0 {
        return Err(FieldError::EmptyWindow);
    }
    let n = width as u64 * height as u64;
    if n > cap {
        return Err(FieldError::TooLarge { bits: n, cap });
    }
    let w = width as usize;
    let mut bits = vec![0u8; n as usize];
    for (row, chunk) in bits.chunks_mut(w).enumerate() {
        rng::field_row(seed, family.tag(), origin.y + row as i64, origin.x, chunk);
    }
    Ok(BitField { family, origin, width, height, seed, bits })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Y0Class {
    Good,
    Zero,
    One,
}

impl Y0Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Y0Class::Good => "good",
            Y0Class::Zero => "zero",
            Y0Class::One => "one",
        }
    }
}

/// Class of a level-0 Y block from its counts (`ones + zeros = M0^2`).
pub fn classify_counts(ones: u32, zeros: u32, threshold: u32) -> Y0Class {
    if ones.min(zeros) >= threshold {
        Y0Class::Good
    } else if zeros > ones {
        Y0Class::Zero
    } else {
        Y0Class::One
    }
}

/// Classifies an `M0 x M0` block; `M0^2 / 3` is rounded up.
pub fn classify_y0_block(block_bits: &[u8], params: &ParameterSet) -> Result<Y0Class, FieldError> {
    let n = (params.m0 * params.m0) as usize;
    if block_bits.len() != n {
        return Err(FieldError::WrongBitCount { expected: n, got: block_bits.len() });
    }
    let ones = block_bits.iter().filter(|&&b| b & 1 == 1).count() as u32;
    Ok(classify_counts(ones, n as u32 - ones, params.good_threshold()))
}

pub fn level0_embeds(x_bit: u8, y_class: Y0Class) -> bool {
    matches!((x_bit, y_class), (_, Y0Class::Good) | (0, Y0Class::Zero) | (1, Y0Class::One))
}

/// Sites of level-0 Y block `v`: `[v M0, (v+1) M0)^2`.
pub fn y_block_rect(v: Point, m0: u32) -> Rect {
    let m = m0 as i64;
    Rect::new(v.x * m, v.y * m, (v.x + 1) * m, (v.y + 1) * m)
}

/// Level-0 index window covered by a field: sites for X, whole `M0` blocks for Y.
pub fn level0_window(field: &BitField, m0: u32) -> Rect {
    match field.family {
        Family::X => field.rect(),
        Family::Y => {
            let r = field.rect();
            let m = m0 as i64;
            Rect::new(r.x0.div_euclid(m) + i64::from(r.x0.rem_euclid(m) != 0), r.y0.div_euclid(m) + i64::from(r.y0.rem_euclid(m) != 0), r.x1.div_euclid(m), r.y1.div_euclid(m))
        }
    }
}

/// Class of Y block `v` read from the field.
pub fn y_block_class(field: &BitField, v: Point, params: &ParameterSet) -> Y0Class {
    let r = y_block_rect(v, params.m0);
    let mut ones = 0u32;
    for p in r.points() {
        ones += field.bit(p) as u32;
    }
    classify_counts(ones, (r.area() as u32) - ones, params.good_threshold())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let mut p = ParameterSet::toy();
        p.m0 = 3;
        let mut b = [0u8; 9];
        b[..3].fill(1);
        assert_eq!(classify_y0_block(&b, &p).unwrap(), Y0Class::Good);
        assert_eq!(classify_y0_block(&[0; 9], &p).unwrap(), Y0Class::Zero);
        p.m0 = 2;
        assert_eq!(classify_y0_block(&[1, 1, 0, 0], &p).unwrap(), Y0Class::Good);
        assert!(classify_y0_block(&[1, 1, 0], &p).is_err());
    }

    #[test]
    fn embed_rules() {
        assert!(level0_embeds(0, Y0Class::Good));
        assert!(!level0_embeds(1, Y0Class::Zero));
        assert!(level0_embeds(0, Y0Class::Zero));
        assert!(level0_embeds(1, Y0Class::One));
    }

    #[test]
    fn y_window_rounds_inward() {
        let f = BitField::from_bits(Family::Y, Point::new(-3, 0), 9, 6, 0, vec![0; 54]).unwrap();
        assert_eq!(level0_window(&f, 3), Rect::new(-1, 0, 2, 2));
    }
}
