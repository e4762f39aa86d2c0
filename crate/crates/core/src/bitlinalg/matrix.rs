use std::fmt;

use super::vector::{dot_words, words_for, BitVector, WORD_BITS};
use crate::{Error, Result};

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::ones(cols); rows],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        Self {
            cols,
            rows: (0..rows)
                .map(|i| BitVector::from_bools((0..cols).map(|j| f(i, j))))
                .collect(),
        }
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Parses rows written as `"0"`/`"1"` text.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().parse())
            .collect::<Result<Vec<BitVector>>>()?;
        Self::from_rows(rows)
    }

    pub fn row_strings(&self) -> Vec<String> {
        self.rows.iter().map(ToString::to_string).collect()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit)
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix::from_fn(self.cols, self.nrows(), |i, j| self.get(j, i))
    }

    /// Matrix-vector product: each output bit is the parity of a row AND `v`.
    pub fn matvec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self.matvec_unchecked(v))
    }

    #[inline]
    pub(crate) fn matvec_unchecked(&self, v: &BitVector) -> BitVector {
        let n = self.nrows();
        let mut words = vec![0u64; words_for(n)];
        for (i, row) in self.rows.iter().enumerate() {
            if dot_words(row.words(), v.words()) {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        BitVector::from_words(n, words)
    }

    /// Entrywise sum mod 2.
    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        self.check_shape(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.xor(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cols: self.cols,
            rows,
        })
    }

    pub fn add_assign(&mut self, other: &BitMatrix) -> Result<()> {
        self.check_shape(other)?;
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b)?;
        }
        Ok(())
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.nrows(),
            });
        }
        let mut out = BitMatrix::zeros(self.nrows(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for k in 0..self.cols {
                if row.get(k) {
                    out.rows[i].xor_assign(&other.rows[k])?;
                }
            }
        }
        Ok(out)
    }

    /// Rank over GF(2) via packed Gaussian elimination on a private copy.
    pub fn rank(&self) -> usize {
        let nw = words_for(self.cols);
        let mut rows: Vec<Vec<u64>> = self.rows.iter().map(|r| r.words().to_vec()).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let (w, bit) = (col / WORD_BITS, 1u64 << (col % WORD_BITS));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let prow = &head[rank];
            for r in tail.iter_mut() {
                if r[w] & bit != 0 {
                    for k in w..nw {
                        r[k] ^= prow[k];
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    fn check_shape(&self, other: &BitMatrix) -> Result<()> {
        if self.nrows() != other.nrows() || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows() * self.cols,
                got: other.nrows() * other.cols,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.nrows(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: unpacked elimination on `Vec<Vec<u8>>`, swapping in
    /// the last nonzero row rather than the first.
    fn naive_rank(m: &BitMatrix) -> usize {
        let mut a: Vec<Vec<u8>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m.get(i, j) as u8).collect())
            .collect();
        let mut rank = 0;
        for c in 0..m.ncols() {
            let Some(p) = (rank..a.len()).rev().find(|&r| a[r][c] == 1) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != rank && row[c] == 1 {
                    row.iter_mut().zip(&pivot).for_each(|(v, p)| *v ^= p);
                }
            }
            rank += 1;
        }
        rank
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> BitMatrix {
        BitMatrix::from_fn(rows, cols, |_, _| rng.random())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(8).rank(), 8);
        assert_eq!(BitMatrix::zeros(8, 8).rank(), 0);
        assert_eq!(BitMatrix::ones(4, 4).rank(), 1);
        assert_eq!(naive_rank(&BitMatrix::ones(4, 4)), 1);
    }

    #[test]
    fn rank_does_not_mutate() {
        let m = BitMatrix::ones(5, 7);
        let before = m.clone();
        let _ = m.rank();
        assert_eq!(m, before);
    }

    #[test]
    fn rank_matches_oracle_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = rng.random_range(1..=32);
            let c = rng.random_range(1..=32);
            let mut m = random_matrix(&mut rng, r, c);
            // bias toward rank deficiency
            if rng.random_bool(0.3) && r > 1 {
                let src = m.row(0).clone();
                m.rows[r - 1] = src;
            }
            assert_eq!(m.rank(), naive_rank(&m));
        }
    }

    #[test]
    fn rank_over_word_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 70, 130);
            assert_eq!(m.rank(), naive_rank(&m));
        }
    }

    #[test]
    fn matvec_identity_and_mismatch() {
        let v: BitVector = "1011001".parse().unwrap();
        assert_eq!(BitMatrix::identity(7).matvec(&v).unwrap(), v);
        assert!(BitMatrix::identity(6).matvec(&v).is_err());
    }

    #[test]
    fn row_string_roundtrip() {
        let m = BitMatrix::parse_rows(&["101", "011"]).unwrap();
        assert_eq!(m.row_strings(), vec!["101", "011"]);
        assert!(BitMatrix::parse_rows(&["10", "011"]).is_err());
    }

    proptest! {
        #[test]
        fn rank_invariant_under_transpose(seed in any::<u64>(), r in 1usize..24, c in 1usize..24) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, r, c);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn matvec_is_linear(seed in any::<u64>(), n in 1usize..80) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, n, n);
            let a = BitVector::from_bools((0..n).map(|_| rng.random()));
            let b = BitVector::from_bools((0..n).map(|_| rng.random()));
            let lhs = m.matvec(&a.xor(&b).unwrap()).unwrap();
            let rhs = m.matvec(&a).unwrap().xor(&m.matvec(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
