//! Packed bit strings.
//!
//! Bits are stored most-significant-bit first: bit `i` lives in byte `i / 8`
//! at position `7 - i % 8`. Unused trailing bits of the last byte are always
//! zero, so the byte representation doubles as the wire/serialization format.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

#[inline]
fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            bytes: vec![0; byte_len(len)],
            len,
        }
    }

    /// Uniformly random string of `len` bits.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0; byte_len(len)];
        rng.fill_bytes(&mut bytes);
        let mut out = BitString { bytes, len };
        out.clear_padding();
        out
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut out = BitString::zeros(len);
        for i in 0..len {
            out.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        out
    }

    /// Rebuilds a string from its packed form. The byte count must be exactly
    /// `ceil(len / 8)` and padding bits must be zero.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, Error> {
        if bytes.len() != byte_len(len) {
            return Err(Error::LengthMismatch {
                what: "packed bytes",
                expected: byte_len(len),
                actual: bytes.len(),
            });
        }
        let out = BitString {
            bytes: bytes.to_vec(),
            len,
        };
        let mut check = out.clone();
        check.clear_padding();
        if check.bytes != out.bytes {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok(out)
    }

    pub(crate) fn from_bytes_truncated(mut bytes: Vec<u8>, len: usize) -> Self {
        bytes.truncate(byte_len(len));
        debug_assert_eq!(bytes.len(), byte_len(len));
        let mut out = BitString { bytes, len };
        out.clear_padding();
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (7 - (i & 7));
        if value {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Copies bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitString::zeros(len);
        if start.is_multiple_of(8) {
            let from = start / 8;
            out.bytes
                .copy_from_slice(&self.bytes[from..from + byte_len(len)]);
            out.clear_padding();
        } else {
            for i in 0..len {
                out.set(i, self.get(start + i));
            }
        }
        out
    }

    /// Packed bytes, padding bits zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Interprets the string as an unsigned integer, first bit most significant.
    pub fn to_u64(&self) -> Option<u64> {
        if self.len > 64 {
            return None;
        }
        Some(self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::zeros(0);
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' | ' ' => {}
                other => return Err(Error::Format(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(out)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
