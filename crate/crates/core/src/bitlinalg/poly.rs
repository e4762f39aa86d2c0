use std::fmt;

use super::vector::WORD_BITS;

/// Polynomial over GF(2); coefficient of `x^i` is bit `i`.
///
/// Stored normalized: no trailing zero words, so the zero polynomial has an
/// empty coefficient list and every other value has a leading one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    pub fn x() -> Self {
        Self::monomial(1)
    }

    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0; k / WORD_BITS + 1];
        words[k / WORD_BITS] = 1 << (k % WORD_BITS);
        Self { words }
    }

    /// Sum of `x^e` for each listed exponent (repeats cancel).
    pub fn from_exponents(exps: &[usize]) -> Self {
        exps.iter()
            .fold(Self::zero(), |acc, &e| acc.add(&Self::monomial(e)))
    }

    pub fn from_coeffs<I: IntoIterator<Item = bool>>(coeffs: I) -> Self {
        let mut words = Vec::new();
        for (i, c) in coeffs.into_iter().enumerate() {
            if i % WORD_BITS == 0 {
                words.push(0);
            }
            if c {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        let mut p = Self { words };
        p.normalize();
        p
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        let top = *self.words.last()?;
        Some((self.words.len() - 1) * WORD_BITS + (63 - top.leading_zeros() as usize))
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / WORD_BITS)
            .is_some_and(|w| (w >> (i % WORD_BITS)) & 1 == 1)
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (a, b) in words.iter_mut().zip(&short.words) {
            *a ^= b;
        }
        let mut p = Self { words };
        p.normalize();
        p
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Self::zero();
        };
        let mut out = vec![0u64; (da + db) / WORD_BITS + 1];
        for i in 0..=da {
            if self.coeff(i) {
                xor_shifted(&mut out, &other.words, i);
            }
        }
        let mut p = Self { words: out };
        p.normalize();
        p
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn divrem(&self, divisor: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.words.clone();
        let mut quot = vec![0u64; self.words.len().max(1)];
        loop {
            let r = Self { words: trimmed(&rem) };
            let Some(dr) = r.degree() else { break };
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            quot[shift / WORD_BITS] |= 1 << (shift % WORD_BITS);
            xor_shifted(&mut rem, &divisor.words, shift);
        }
        let mut q = Self { words: quot };
        q.normalize();
        let mut r = Self { words: rem };
        r.normalize();
        (q, r)
    }

    pub fn rem(&self, divisor: &Gf2Poly) -> Gf2Poly {
        self.divrem(divisor).1
    }

    pub fn gcd(&self, other: &Gf2Poly) -> Gf2Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn mulmod(&self, other: &Gf2Poly, modulus: &Gf2Poly) -> Gf2Poly {
        self.mul(other).rem(modulus)
    }

    /// Ben-Or irreducibility test: `p` of degree `d` is irreducible iff
    /// `gcd(p, x^(2^i) - x) = 1` for every `1 <= i <= d/2`.
    pub fn is_irreducible(&self) -> bool {
        let Some(d) = self.degree() else { return false };
        if d == 0 {
            return false;
        }
        let x = Self::x();
        let mut t = x.rem(self);
        for _ in 1..=d / 2 {
            t = t.mulmod(&t, self);
            if !self.gcd(&t.add(&x)).is_one() {
                return false;
            }
        }
        true
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

fn trimmed(words: &[u64]) -> Vec<u64> {
    let end = words.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
    words[..end].to_vec()
}

/// `dst ^= src << shift`, growing `dst` as needed.
fn xor_shifted(dst: &mut Vec<u64>, src: &[u64], shift: usize) {
    let (ws, bs) = (shift / WORD_BITS, shift % WORD_BITS);
    let need = src.len() + ws + 1;
    if dst.len() < need {
        dst.resize(need, 0);
    }
    for (i, &w) in src.iter().enumerate() {
        dst[i + ws] ^= w << bs;
        if bs != 0 {
            dst[i + ws + 1] ^= w >> (WORD_BITS - bs);
        }
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let terms: Vec<String> = (0..=d)
            .rev()
            .filter(|&i| self.coeff(i))
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

/// Lowest-weight irreducible polynomial of each degree 1..=64: the middle
/// exponents of a trinomial `x^n + x^k + 1`, or of a pentanomial
/// `x^n + x^a + x^b + x^c + 1` when no trinomial exists. Degree 1 uses `x + 1`.
const IRREDUCIBLE_MIDDLE: [&[usize]; 64] = [
    &[],
    &[1],
    &[1],
    &[1],
    &[2],
    &[1],
    &[1],
    &[4, 3, 1],
    &[1],
    &[3],
    &[2],
    &[3],
    &[4, 3, 1],
    &[5],
    &[1],
    &[5, 3, 1],
    &[3],
    &[3],
    &[5, 2, 1],
    &[3],
    &[2],
    &[1],
    &[5],
    &[4, 3, 1],
    &[3],
    &[4, 3, 1],
    &[5, 2, 1],
    &[1],
    &[2],
    &[1],
    &[3],
    &[7, 3, 2],
    &[10],
    &[7],
    &[2],
    &[9],
    &[6, 4, 1],
    &[6, 5, 1],
    &[4],
    &[5, 4, 3],
    &[3],
    &[7],
    &[6, 4, 3],
    &[5],
    &[4, 3, 1],
    &[1],
    &[5],
    &[5, 3, 2],
    &[9],
    &[4, 3, 2],
    &[6, 3, 1],
    &[3],
    &[6, 2, 1],
    &[9],
    &[7],
    &[7, 4, 2],
    &[4],
    &[19],
    &[7, 4, 2],
    &[1],
    &[5, 2, 1],
    &[29],
    &[1],
    &[4, 3, 1],
];

/// The table's irreducible polynomial of degree `n`, if `1 <= n <= 64`.
pub fn table_irreducible(n: usize) -> Option<Gf2Poly> {
    let middle = IRREDUCIBLE_MIDDLE.get(n.checked_sub(1)?)?;
    let mut exps = vec![n, 0];
    exps.extend_from_slice(middle);
    Some(Gf2Poly::from_exponents(&exps))
}
