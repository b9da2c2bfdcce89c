//! Fixed-width bit vectors used for challenges and responses.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered vector of bits, packed little-endian into 64-bit words.
///
/// Bit `j` lives in word `j / 64` at position `j % 64`. Bits past `len` are
/// always zero so that equality and hashing work on the packed words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

/// A PUF challenge.
pub type Challenge = BitVector;
/// A PUF response.
pub type Response = BitVector;

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            v.set(j, b);
        }
        v
    }

    /// Bit `j` of the result is bit `j` of `value`. Requires `len <= 64`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        BitVector {
            len,
            words: if len == 0 { vec![] } else { vec![value & mask] },
        }
    }

    /// Uniformly random vector of the given width.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.clear_tail();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, bit: bool) {
        assert!(j < self.len, "bit index {j} out of range for width {}", self.len);
        let mask = 1u64 << (j % 64);
        if bit {
            self.words[j / 64] |= mask;
        } else {
            self.words[j / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, j: usize) {
        let b = self.get(j);
        self.set(j, !b);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        self.check_width(other)?;
        Ok(BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn not(&self) -> BitVector {
        let mut v = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_tail();
        v
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        Ok(self.xor(other)?.count_ones())
    }

    /// Value of the vector as an integer, bit `j` weighted `2^j`. Requires `len <= 64`.
    pub fn as_u64(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Packs into `ceil(len/8)` bytes: bit `j` is bit `j % 8` of byte `j / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        let n = self.len.div_ceil(8);
        out.extend((0..n).map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8));
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        let n = len.div_ceil(8);
        if bytes.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{len}-bit vector needs {n} bytes, got {}",
                bytes.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (i, &b) in bytes.iter().enumerate() {
            v.words[i / 8] |= (b as u64) << ((i % 8) * 8);
        }
        if v.has_tail_bits() {
            return Err(Error::InvalidArgument(
                "nonzero padding bits in packed vector".into(),
            ));
        }
        Ok(v)
    }

    /// Lowercase hex, most significant nibble first, zero-padded to `ceil(len/4)` digits.
    pub fn to_hex(&self) -> Result<String> {
        let value = self.as_u64().ok_or_else(|| {
            Error::InvalidArgument(format!("hex encoding supports at most 64 bits, got {}", self.len))
        })?;
        let digits = self.len.div_ceil(4);
        Ok(format!("{value:0digits$x}"))
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(Error::InvalidArgument(format!(
                "hex encoding supports at most 64 bits, got {len}"
            )));
        }
        let digits = len.div_ceil(4);
        if s.len() != digits || !s.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(Error::InvalidArgument(format!(
                "expected {digits} lowercase hex digits, got {s:?}"
            )));
        }
        let value = if digits == 0 { 0 } else { u64::from_str_radix(s, 16).map_err(|e| Error::InvalidArgument(e.to_string()))? };
        if len < 64 && value >> len != 0 {
            return Err(Error::InvalidArgument(format!("{s:?} does not fit in {len} bits")));
        }
        Ok(Self::from_u64(value, len))
    }

    fn check_width(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::WidthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    fn has_tail_bits(&self) -> bool {
        let rem = self.len % 64;
        rem != 0 && self.words.last().is_some_and(|w| w >> rem != 0)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}](", self.len)?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

/// Dense row-major matrix of bits, one byte per entry.
///
/// Rows are samples, columns are bit positions (challenge features or
/// response bits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    /// Stacks equally wide vectors as rows.
    pub fn from_rows<'a, I>(cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let mut data = Vec::new();
        let mut n = 0;
        for v in rows {
            if v.len() != cols {
                return Err(Error::WidthMismatch { expected: cols, actual: v.len() });
            }
            data.extend(v.iter().map(u8::from));
            n += 1;
        }
        Ok(BitMatrix { rows: n, cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bit matrix entries must be 0 or 1".into()));
        }
        Ok(BitMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.data[i * self.cols + j] = bit as u8;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn row_vector(&self, i: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        for (j, &b) in self.row(i).iter().enumerate() {
            v.set(j, b == 1);
        }
        v
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> BitMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        BitMatrix { rows: indices.len(), cols: self.cols, data }
    }

    /// Replaces column `j` with `values`.
    pub fn with_column(&self, j: usize, values: &[u8]) -> BitMatrix {
        let mut m = self.clone();
        for (i, &v) in values.iter().enumerate() {
            m.data[i * self.cols + j] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn byte_layout_is_little_endian_per_bit() {
        let v = BitVector::from_bools(&[true, false, false, false, false, false, false, false, false, true]);
        assert_eq!(v.to_bytes(), vec![0x01, 0x02]);
        assert_eq!(BitVector::from_bytes(&[0x01, 0x02], 10).unwrap(), v);
    }

    #[test]
    fn padding_bits_rejected() {
        assert!(BitVector::from_bytes(&[0xff], 4).is_err());
    }

    #[test]
    fn hex_is_msb_first_and_padded() {
        let v = BitVector::from_u64(0x0a, 12);
        assert_eq!(v.to_hex().unwrap(), "00a");
        assert_eq!(BitVector::from_hex("00a", 12).unwrap(), v);
        assert!(BitVector::from_hex("00A", 12).is_err());
        assert!(BitVector::from_hex("f", 3).is_err());
        assert!(BitVector::zeros(65).to_hex().is_err());
    }

    #[test]
    fn random_keeps_tail_clear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for len in [1, 7, 63, 64, 65, 130] {
            let v = BitVector::random(&mut rng, len);
            assert!(!v.has_tail_bits());
            assert_eq!(v.not().not(), v);
        }
    }
}
