use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A packed vector over GF(2).
///
/// Bit `j` lives in bit `j % 64` of word `j / 64`. Pad bits past `len` are
/// always zero, so word-level equality, popcount and parity are exact.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![!0; words_for(len)],
        };
        v.clear_padding();
        v
    }

    /// Unit vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// The low `len` bits of `value`, bit `j` of the vector being bit `j` of
    /// the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS, "from_u64 supports at most 64 bits");
        let mut v = Self {
            len,
            words: if len == 0 { Vec::new() } else { vec![value] },
        };
        v.clear_padding();
        v
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_padding();
        v
    }

    /// Reads `len` bits starting at `bit_offset` from an LSB-first byte
    /// stream. Returns `None` if the slice is too short.
    pub fn from_le_bits(bytes: &[u8], bit_offset: usize, len: usize) -> Option<Self> {
        if bit_offset + len > bytes.len() * 8 {
            return None;
        }
        let nwords = words_for(len);
        let mut words = vec![0u64; nwords];
        if bit_offset.is_multiple_of(8) {
            let start = bit_offset / 8;
            let nbytes = len.div_ceil(8);
            let src = &bytes[start..start + nbytes];
            for (w, chunk) in words.iter_mut().zip(src.chunks(8)) {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                *w = u64::from_le_bytes(buf);
            }
        } else {
            for (w, word) in words.iter_mut().enumerate() {
                let start = bit_offset + w * WORD_BITS;
                let take = (len - w * WORD_BITS).min(WORD_BITS);
                *word = read_bits(bytes, start, take);
            }
        }
        Some(Self::from_words(len, words))
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
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, bit: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if bit {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len);
        self.words[index / WORD_BITS] ^= 1 << (index % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the Hamming weight.
    pub fn parity(&self) -> bool {
        self.words.iter().fold(0, |acc, w| acc ^ w).count_ones() & 1 == 1
    }

    /// Inner product mod 2. Errors on length mismatch.
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &BitVector) -> bool {
        dot_words(&self.words, &other.words)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn and(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other)?;
        Ok(Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Low 64 bits as an integer (bit `j` of the vector → bit `j`).
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Cyclic rotation: `out[j] = self[(j + k) mod len]`.
    pub fn rotate_left(&self, k: usize) -> BitVector {
        let n = self.len;
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        if k == 0 {
            return self.clone();
        }
        let mut words = self.range_words(k, n - k);
        words.resize(words_for(n), 0);
        or_shifted(&mut words, &self.range_words(0, k), n - k);
        BitVector::from_words(n, words)
    }

    /// Words holding bits `start..start + len`, shifted down to bit 0.
    fn range_words(&self, start: usize, len: usize) -> Vec<u64> {
        let shift = start % WORD_BITS;
        let first = start / WORD_BITS;
        let mut out: Vec<u64> = (0..words_for(len))
            .map(|w| {
                let lo = self.words.get(first + w).copied().unwrap_or(0);
                if shift == 0 {
                    lo
                } else {
                    let hi = self.words.get(first + w + 1).copied().unwrap_or(0);
                    (lo >> shift) | (hi << (WORD_BITS - shift))
                }
            })
            .collect();
        let rem = len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = out.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        out
    }

    /// Appends the bits of `self` to an LSB-first byte sink.
    pub fn append_to(&self, sink: &mut BitSink) {
        sink.push_words(&self.words, self.len);
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        Ok(())
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

#[inline]
pub(crate) fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let acc = a.iter().zip(b).fold(0u64, |acc, (x, y)| acc ^ (x & y));
    acc.count_ones() & 1 == 1
}

/// ORs `src` (zero-padded words) into `dst` starting at bit `offset`.
fn or_shifted(dst: &mut [u64], src: &[u64], offset: usize) {
    let first = offset / WORD_BITS;
    let shift = offset % WORD_BITS;
    for (w, &word) in src.iter().enumerate() {
        if let Some(d) = dst.get_mut(first + w) {
            *d |= word << shift;
        }
        if shift != 0 {
            if let Some(d) = dst.get_mut(first + w + 1) {
                *d |= word >> (WORD_BITS - shift);
            }
        }
    }
}

fn read_bits(bytes: &[u8], start: usize, take: usize) -> u64 {
    let mut out = 0u64;
    let mut got = 0;
    let mut pos = start;
    while got < take {
        let byte = bytes[pos / 8];
        let shift = pos % 8;
        let avail = (8 - shift).min(take - got);
        let chunk = (byte >> shift) as u64 & ((1u64 << avail) - 1);
        out |= chunk << got;
        got += avail;
        pos += avail;
    }
    out
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bit string contains {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector::from_bools)
    }
}

/// Accumulates bits LSB-first into bytes. The last byte is zero-padded by
/// [`BitSink::into_bytes`].
#[derive(Debug, Default, Clone)]
pub struct BitSink {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitSink {
    pub fn with_capacity_bits(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bits: 0,
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.bits.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (self.bits % 8);
        }
        self.bits += 1;
    }

    fn push_words(&mut self, words: &[u64], len: usize) {
        if self.bits.is_multiple_of(8) {
            let nbytes = len.div_ceil(8);
            let mut written = 0;
            for w in words {
                for b in w.to_le_bytes() {
                    if written == nbytes {
                        break;
                    }
                    self.bytes.push(b);
                    written += 1;
                }
            }
            self.bits += len;
            // pad bits in the last byte are already zero
            return;
        }
        for j in 0..len {
            self.push_bit((words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let v: BitVector = "1100".parse().unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.get(0) && v.get(1) && !v.get(2));
        assert_eq!(v.to_string(), "1100");
        assert!("10x".parse::<BitVector>().is_err());
    }

    #[test]
    fn ones_has_clean_padding() {
        let v = BitVector::ones(70);
        assert_eq!(v.count_ones(), 70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
    }

    #[test]
    fn dot_length_mismatch() {
        let a = BitVector::zeros(3);
        let b = BitVector::zeros(4);
        assert!(matches!(a.dot(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rotate() {
        let v: BitVector = "10010".parse().unwrap();
        assert_eq!(v.rotate_left(1).to_string(), "00101");
        assert_eq!(v.rotate_left(5), v);
    }

    proptest! {
        #[test]
        fn le_bits_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..300), lead in 0usize..13) {
            let mut sink = BitSink::default();
            for _ in 0..lead { sink.push_bit(true); }
            let v = BitVector::from_bools(bits.clone());
            v.append_to(&mut sink);
            let bytes = sink.into_bytes();
            let back = BitVector::from_le_bits(&bytes, lead, bits.len()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn rotate_matches_index_formula(bits in proptest::collection::vec(any::<bool>(), 1..300), k in 0usize..400) {
            let n = bits.len();
            let v = BitVector::from_bools(bits.clone());
            let expect = BitVector::from_bools((0..n).map(|j| bits[(j + k) % n]));
            prop_assert_eq!(v.rotate_left(k), expect);
        }
    }
}
