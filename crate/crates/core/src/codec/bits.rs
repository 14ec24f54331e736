//! LSB-first bit streams with fixed-width and Elias-gamma integer codes.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn write_bit(&mut self, bit: bool) {
        let offset = (self.len % 8) as u32;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << offset;
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, least significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        for i in 0..width {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Elias-gamma code of `x ≥ 1`: `N` zeros, a one, then the low `N` bits,
    /// where `N = floor(log2 x)`.
    pub fn write_gamma(&mut self, x: u64) {
        assert!(x >= 1, "Elias-gamma code needs a positive integer");
        let n = 63 - x.leading_zeros();
        for _ in 0..n {
            self.write_bit(false);
        }
        self.write_bit(true);
        self.write_bits(x & ((1u64 << n) - 1), n);
    }

    /// Writes `value` in offset binary: `value + bound` in `width` bits.
    pub fn write_signed(&mut self, value: i64, bound: u64, width: u32) {
        self.write_bits((value as i128 + bound as i128) as u64, width);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Length in bits of the Elias-gamma code of `x ≥ 1`.
pub fn gamma_len(x: u64) -> u64 {
    2 * (63 - x.leading_zeros() as u64) + 1
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    end: u64,
}

impl<'a> BitReader<'a> {
    /// Reads at most `len_bits` bits from `bytes`.
    pub fn new(bytes: &'a [u8], len_bits: u64) -> Result<Self> {
        if len_bits > bytes.len() as u64 * 8 {
            return Err(Error::Truncated);
        }
        Ok(BitReader {
            bytes,
            pos: 0,
            end: len_bits,
        })
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.end - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.end {
            return Err(Error::Truncated);
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = (byte >> (self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        if self.remaining() < width as u64 {
            return Err(Error::Truncated);
        }
        let mut v = 0u64;
        for i in 0..width {
            if self.read_bit()? {
                v |= 1 << i;
            }
        }
        Ok(v)
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut n = 0u32;
        while !self.read_bit()? {
            n += 1;
            if n > 63 {
                return Err(Error::Malformed("Elias-gamma prefix too long".into()));
            }
        }
        Ok((1u64 << n) | self.read_bits(n)?)
    }

    pub fn read_signed(&mut self, bound: u64, width: u32) -> Result<i64> {
        let raw = self.read_bits(width)?;
        if raw > 2 * bound {
            return Err(Error::Malformed(format!("offset value {raw} exceeds {}", 2 * bound)));
        }
        Ok((raw as i128 - bound as i128) as i64)
    }
}
