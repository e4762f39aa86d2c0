//! GF(2) linear algebra: packed bit vectors and matrices, polynomials, and
//! the rank-certified matrix families behind the DEOR extractor.

mod family;
mod matrix;
mod poly;
mod vector;

pub use family::{is_prime, is_primitive_root_2, Construction, MatrixFamily, EXHAUSTIVE_MAX_M};
pub use matrix::BitMatrix;
pub use poly::{table_irreducible, Gf2Poly};
pub use vector::{BitSink, BitVector};

use crate::Result;

pub fn rank_gf2(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn matvec_gf2(m: &BitMatrix, v: &BitVector) -> Result<BitVector> {
    m.matvec(v)
}

pub fn gf2poly_gcd(a: &Gf2Poly, b: &Gf2Poly) -> Gf2Poly {
    a.gcd(b)
}

pub fn irreducible(p: &Gf2Poly) -> bool {
    p.is_irreducible()
}

pub fn build_field_family(n: usize, m: usize) -> Result<MatrixFamily> {
    MatrixFamily::field(n, m)
}

pub fn build_circulant_family(n: usize, m: usize) -> Result<MatrixFamily> {
    MatrixFamily::circulant(n, m)
}
