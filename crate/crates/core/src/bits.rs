//! Bit-exact payload encoding.
//!
//! Certificates are bit strings, not byte strings: the scheme size bounds
//! are stated in bits, so the writer tracks the exact length. The hex form
//! used in assignment files prepends a sentinel 1 bit before packing, which
//! keeps leading zeros and the exact bit length across a round trip.

use std::fmt;

/// An exact-length bit string (MSB-first within the backing bytes).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Bits::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        if i >= self.len {
            return None;
        }
        Some(self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let idx = self.bytes.len() - 1;
            self.bytes[idx] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i).unwrap())
    }

    /// Hex encoding with a sentinel: the bit string `b` is packed as the
    /// binary number `1·b` and printed in hex. `""` encodes as `"1"`,
    /// `0100011` as `"a3"`. Exact lengths survive the round trip.
    pub fn to_hex(&self) -> String {
        let mut digits = Vec::new();
        // Build nibbles from the tail so the sentinel lands in the leading digit.
        let mut acc: u8 = 0;
        let mut acc_len = 0;
        for i in (0..self.len).rev() {
            if self.get(i).unwrap() {
                acc |= 1 << acc_len;
            }
            acc_len += 1;
            if acc_len == 4 {
                digits.push(acc);
                acc = 0;
                acc_len = 0;
            }
        }
        // sentinel bit
        acc |= 1 << acc_len;
        digits.push(acc);
        digits.iter().rev().map(|d| char::from_digit(*d as u32, 16).unwrap()).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        if s.is_empty() {
            return Err(BitsError::BadHex);
        }
        let mut raw = Bits::new();
        for c in s.chars() {
            let d = c.to_digit(16).ok_or(BitsError::BadHex)? as u8;
            for k in (0..4).rev() {
                raw.push(d & (1 << k) != 0);
            }
        }
        // Drop everything up to and including the sentinel 1.
        let sentinel = raw.iter().position(|b| b).ok_or(BitsError::BadHex)?;
        let mut out = Bits::new();
        for i in sentinel + 1..raw.len() {
            out.push(raw.get(i).unwrap());
        }
        Ok(out)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}]", self.iter().map(|b| if b { '1' } else { '0' }).collect::<String>())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsError {
    #[error("truncated payload")]
    Truncated,
    #[error("trailing bits after payload")]
    Trailing,
    #[error("invalid hex payload")]
    BadHex,
    #[error("field out of range")]
    Range,
}

/// MSB-first writer for fixed-width fields.
#[derive(Default)]
pub struct BitWriter {
    bits: Bits,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        assert!(width == 64 || value < (1u64 << width), "value {value} overflows {width} bits");
        for k in (0..width).rev() {
            self.bits.push(value & (1 << k) != 0);
        }
    }

    pub fn finish(self) -> Bits {
        self.bits
    }
}

/// Sequential reader; all decode errors are surfaced so verifiers can
/// translate them into local rejection.
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a Bits) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn read_bit(&mut self) -> Result<bool, BitsError> {
        let b = self.bits.get(self.pos).ok_or(BitsError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: usize) -> Result<u64, BitsError> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    /// Decoders call this last: a canonical payload has no spare bits.
    pub fn expect_end(&self) -> Result<(), BitsError> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(BitsError::Trailing)
        }
    }
}

/// Width in bits of the largest value a graph's id space needs, i.e.
/// ceil(log2(maxid+1)). Certificates embed this so verifiers can decode
/// without global knowledge.
pub fn id_width(max_id: u64) -> usize {
    (64 - max_id.leading_zeros()) as usize
}

pub const ID_WIDTH_FIELD: usize = 6;

pub fn write_id_width(w: &mut BitWriter, width: usize) {
    debug_assert!((1..=64).contains(&width));
    w.write_uint((width - 1) as u64, ID_WIDTH_FIELD);
}

pub fn read_id_width(r: &mut BitReader) -> Result<usize, BitsError> {
    Ok(r.read_uint(ID_WIDTH_FIELD)? as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_exact_lengths() {
        for pattern in [vec![], vec![true], vec![false], vec![false, true, false, false, false, true, true]] {
            let mut b = Bits::new();
            for bit in &pattern {
                b.push(*bit);
            }
            let hex = b.to_hex();
            let back = Bits::from_hex(&hex).unwrap();
            assert_eq!(b, back, "pattern {pattern:?} via {hex}");
        }
        let mut b = Bits::new();
        for bit in [false, true, false, false, false, true, true] {
            b.push(bit);
        }
        assert_eq!(b.to_hex(), "a3");
    }

    #[test]
    fn empty_is_sentinel_only() {
        assert_eq!(Bits::new().to_hex(), "1");
        assert_eq!(Bits::from_hex("1").unwrap().len(), 0);
    }

    #[test]
    fn uint_round_trip() {
        let mut w = BitWriter::new();
        w.write_uint(5, 3);
        w.write_uint(0, 4);
        w.write_bit(true);
        let bits = w.finish();
        assert_eq!(bits.len(), 8);
        let mut r = BitReader::new(&bits);
        assert_eq!(r.read_uint(3).unwrap(), 5);
        assert_eq!(r.read_uint(4).unwrap(), 0);
        assert!(r.read_bit().unwrap());
        r.expect_end().unwrap();
    }

    #[test]
    fn truncation_detected() {
        let mut w = BitWriter::new();
        w.write_uint(3, 2);
        let bits = w.finish();
        let mut r = BitReader::new(&bits);
        assert_eq!(r.read_uint(3), Err(BitsError::Truncated));
    }

    #[test]
    fn id_width_matches_ceil_log2() {
        assert_eq!(id_width(1), 1);
        assert_eq!(id_width(7), 3);
        assert_eq!(id_width(8), 4);
        assert_eq!(id_width(100_000), 17);
    }
}
