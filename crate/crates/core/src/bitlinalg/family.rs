use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::BitMatrix;
use super::poly::table_irreducible;
use super::vector::BitVector;
use crate::{Error, Result};

/// Largest `m` for which [`MatrixFamily::min_rank_exhaustive`] enumerates all
/// nonzero combinations.
pub const EXHAUSTIVE_MAX_M: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    #[serde(rename = "field-mult")]
    FieldMult,
    #[serde(rename = "circulant")]
    Circulant,
    #[serde(rename = "explicit")]
    Explicit,
}

/// An ordered list of `m` square `n x n` matrices such that every nonzero
/// GF(2) combination has rank at least `n - r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFamily {
    n: usize,
    m: usize,
    r: usize,
    construction: Construction,
    matrices: Vec<BitMatrix>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    n: usize,
    m: usize,
    r: usize,
    construction: Construction,
    matrices: Vec<Vec<String>>,
}

impl MatrixFamily {
    /// `K_i` is multiplication by `alpha^(i-1)` in GF(2^n), written in the
    /// polynomial basis of the table's irreducible polynomial. Any nonzero
    /// combination is multiplication by a nonzero field element, so `r = 0`.
    pub fn field(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!(
                "field family needs 1 <= m <= n, got n={n}, m={m}"
            )));
        }
        let modulus = table_irreducible(n).ok_or(Error::UnsupportedDegree(n))?;
        // companion matrix: column j is x^(j+1) mod p
        let companion = BitMatrix::from_fn(n, n, |i, j| {
            if j + 1 < n {
                i == j + 1
            } else {
                modulus.coeff(i)
            }
        });
        let mut matrices = Vec::with_capacity(m);
        let mut k = BitMatrix::identity(n);
        for _ in 0..m {
            let next = companion.mul(&k)?;
            matrices.push(k);
            k = next;
        }
        Ok(Self {
            n,
            m,
            r: 0,
            construction: Construction::FieldMult,
            matrices,
        })
    }

    /// `K_i = C^(i-1)` with `C` the cyclic left shift, `(C y)_j = y_{j+1 mod n}`.
    ///
    /// A combination is the circulant of `s(x) = sum s_i x^(i-1)`, with rank
    /// `n - deg gcd(s, x^n - 1)`. For prime `n` with 2 a primitive root,
    /// `x^n - 1 = (x + 1) * Phi_n` with `Phi_n` irreducible of degree `n - 1`;
    /// `deg s <= m - 1 < n - 1` then forces `gcd | x + 1`, so `r = 1`.
    pub fn circulant(n: usize, m: usize) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        if !is_primitive_root_2(n) {
            return Err(Error::NotPrimitiveRoot(n));
        }
        if m == 0 || m >= n {
            return Err(Error::InvalidParameter(format!(
                "circulant family needs 1 <= m < n, got n={n}, m={m} \
                 (m = n admits the all-ones combination of rank 1)"
            )));
        }
        let matrices = (0..m)
            .map(|shift| BitMatrix::from_fn(n, n, |i, j| j == (i + shift) % n))
            .collect();
        Ok(Self {
            n,
            m,
            r: 1,
            construction: Construction::Circulant,
            matrices,
        })
    }

    /// Wraps caller-provided matrices with a claimed rank deficiency `r`.
    /// The claim is not checked here; see [`MatrixFamily::certify`].
    pub fn explicit(matrices: Vec<BitMatrix>, r: usize) -> Result<Self> {
        let n = matrices
            .first()
            .map(BitMatrix::nrows)
            .ok_or_else(|| Error::InvalidParameter("empty matrix family".into()))?;
        for k in &matrices {
            if k.nrows() != n || k.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: if k.nrows() != n { k.nrows() } else { k.ncols() },
                });
            }
        }
        if r > n {
            return Err(Error::InvalidParameter(format!("r={r} exceeds n={n}")));
        }
        Ok(Self {
            n,
            m: matrices.len(),
            r,
            construction: Construction::Explicit,
            matrices,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    /// `K_s = sum_i s_i K_i`, where `s_i` is bit `i` of `s`.
    pub fn combination(&self, s: &BitVector) -> Result<BitMatrix> {
        if s.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: s.len(),
            });
        }
        let mut acc = BitMatrix::zeros(self.n, self.n);
        for (i, k) in self.matrices.iter().enumerate() {
            if s.get(i) {
                acc.add_assign(k)?;
            }
        }
        Ok(acc)
    }

    /// Minimum rank over all `2^m - 1` nonzero combinations.
    pub fn min_rank_exhaustive(&self) -> Result<usize> {
        if self.m > EXHAUSTIVE_MAX_M {
            return Err(Error::InvalidParameter(format!(
                "exhaustive certification supports m <= {EXHAUSTIVE_MAX_M}, got {}",
                self.m
            )));
        }
        // Gray-code walk: one matrix addition per step.
        let mut acc = BitMatrix::zeros(self.n, self.n);
        let mut min = self.n;
        for step in 1u64..(1 << self.m) {
            let flip = step.trailing_zeros() as usize;
            acc.add_assign(&self.matrices[flip])?;
            min = min.min(acc.rank());
        }
        Ok(min)
    }

    /// Minimum rank over `samples` uniformly random nonzero combinations.
    pub fn min_rank_sampled<R: Rng>(&self, samples: usize, rng: &mut R) -> Result<usize> {
        let mut min = self.n;
        for _ in 0..samples {
            let s = loop {
                let s = BitVector::from_bools((0..self.m).map(|_| rng.random::<bool>()));
                if !s.is_zero() {
                    break s;
                }
            };
            min = min.min(self.combination(&s)?.rank());
        }
        Ok(min)
    }

    /// Checks the claimed `r`: exhaustively for `m <= 16`, otherwise by
    /// sampling `samples` combinations.
    pub fn certify<R: Rng>(&self, samples: usize, rng: &mut R) -> Result<usize> {
        let min = if self.m <= EXHAUSTIVE_MAX_M {
            self.min_rank_exhaustive()?
        } else {
            self.min_rank_sampled(samples, rng)?
        };
        if min + self.r < self.n {
            return Err(Error::InvalidParameter(format!(
                "family claims r={} but a combination has rank {min} < n - r = {}",
                self.r,
                self.n - self.r
            )));
        }
        Ok(min)
    }

    pub fn to_json(&self) -> Result<String> {
        let json = FamilyJson {
            n: self.n,
            m: self.m,
            r: self.r,
            construction: self.construction,
            matrices: self.matrices.iter().map(BitMatrix::row_strings).collect(),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    /// Parses the JSON form and checks shapes against the `n`/`m` header.
    pub fn from_json(text: &str) -> Result<Self> {
        let json: FamilyJson = serde_json::from_str(text)?;
        let matrices = json
            .matrices
            .iter()
            .map(|rows| BitMatrix::parse_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        if matrices.len() != json.m {
            return Err(Error::DimensionMismatch {
                expected: json.m,
                got: matrices.len(),
            });
        }
        let mut family = Self::explicit(matrices, json.r)?;
        if family.n != json.n {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                got: family.n,
            });
        }
        family.construction = json.construction;
        Ok(family)
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// True iff `n` is prime and 2 has multiplicative order `n - 1` modulo `n`.
pub fn is_primitive_root_2(n: usize) -> bool {
    if !is_prime(n) || n == 2 {
        return false;
    }
    let mut order = 1;
    let mut pow = 2 % n;
    while pow != 1 {
        pow = pow * 2 % n;
        order += 1;
    }
    order == n - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitlinalg::Gf2Poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn order_of_two_brute(n: usize) -> Option<usize> {
        (1..n).find(|&k| (0..k).fold(1usize, |acc, _| acc * 2 % n) == 1)
    }

    #[test]
    fn primitive_root_examples() {
        assert!(is_primitive_root_2(3));
        assert!(is_primitive_root_2(5));
        assert!(!is_primitive_root_2(7));
        assert!(!is_primitive_root_2(2));
        assert!(!is_primitive_root_2(9));
        for n in 3..200 {
            let expect = is_prime(n) && order_of_two_brute(n) == Some(n - 1);
            assert_eq!(is_primitive_root_2(n), expect, "n={n}");
        }
    }

    #[test]
    fn field_family_examples() {
        let f = MatrixFamily::field(1, 1).unwrap();
        assert_eq!(f.matrices()[0], BitMatrix::identity(1));
        assert_eq!(f.r(), 0);

        let f = MatrixFamily::field(3, 2).unwrap();
        assert_eq!(f.matrices()[0], BitMatrix::identity(3));
        assert_eq!(f.matrices()[0].rank(), 3);

        let f = MatrixFamily::field(8, 8).unwrap();
        assert_eq!(f.min_rank_exhaustive().unwrap(), 8);
    }

    #[test]
    fn field_family_errors() {
        assert!(MatrixFamily::field(4, 5).is_err());
        assert!(MatrixFamily::field(4, 0).is_err());
        assert!(matches!(
            MatrixFamily::field(65, 1),
            Err(Error::UnsupportedDegree(65))
        ));
    }

    /// Field family combinations multiply by s(alpha); check against direct
    /// polynomial arithmetic.
    #[test]
    fn field_family_matches_polynomial_multiplication() {
        let n = 5;
        let f = MatrixFamily::field(n, n).unwrap();
        let p = table_irreducible(n).unwrap();
        for s in 1u64..(1 << n) {
            let sv = BitVector::from_u64(s, n);
            let k = f.combination(&sv).unwrap();
            let spoly = Gf2Poly::from_coeffs(sv.iter());
            for v in 0u64..(1 << n) {
                let vv = BitVector::from_u64(v, n);
                let expect = spoly.mulmod(&Gf2Poly::from_coeffs(vv.iter()), &p);
                let got = k.matvec(&vv).unwrap();
                assert_eq!(Gf2Poly::from_coeffs(got.iter()), expect);
            }
        }
    }

    #[test]
    fn circulant_examples() {
        let f = MatrixFamily::circulant(3, 2).unwrap();
        assert_eq!(f.matrices()[0], BitMatrix::identity(3));
        assert!(f.min_rank_exhaustive().unwrap() >= 2);

        let f = MatrixFamily::circulant(5, 3).unwrap();
        for s in 1u64..8 {
            let k = f.combination(&BitVector::from_u64(s, 3)).unwrap();
            assert!(k.rank() >= 4);
        }
    }

    #[test]
    fn circulant_errors() {
        assert!(matches!(MatrixFamily::circulant(4, 2), Err(Error::NotPrime(4))));
        assert!(matches!(
            MatrixFamily::circulant(7, 2),
            Err(Error::NotPrimitiveRoot(7))
        ));
        assert!(MatrixFamily::circulant(5, 5).is_err());
    }

    #[test]
    fn circulant_rank_matches_gcd_formula() {
        let n = 11;
        let f = MatrixFamily::circulant(n, n - 1).unwrap();
        let xn1 = Gf2Poly::from_exponents(&[n, 0]);
        for s in 1u64..(1 << (n - 1)) {
            let sv = BitVector::from_u64(s, n - 1);
            let g = Gf2Poly::from_coeffs(sv.iter()).gcd(&xn1);
            let rank = f.combination(&sv).unwrap().rank();
            assert_eq!(rank, n - g.degree().unwrap());
        }
    }

    #[test]
    fn json_roundtrip_is_canonical() {
        let f = MatrixFamily::circulant(3, 2).unwrap();
        let text = f.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        // serde_json without preserve_order sorts keys, so check the text
        let pos: Vec<_> = ["\"n\"", "\"m\"", "\"r\"", "\"construction\"", "\"matrices\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(keys.len(), 5);
        assert_eq!(value["matrices"][1][0], "010");
        let back = MatrixFamily::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn certify_rejects_false_claims() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bad = MatrixFamily::explicit(vec![BitMatrix::identity(3), BitMatrix::identity(3)], 0)
            .unwrap();
        assert!(bad.certify(10, &mut rng).is_err());
        let good = MatrixFamily::field(6, 4).unwrap();
        assert_eq!(good.certify(10, &mut rng).unwrap(), 6);
    }
}
