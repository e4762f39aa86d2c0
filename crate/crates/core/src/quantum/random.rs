//! Seeded random states and instruments.

use rand::Rng;
use rand_distr::StandardNormal;

use super::instrument::{CqState, Instrument, Outcome};
use super::linalg::{CMat, CVec, C64};
use super::state::{total_dim, DensityOperator, SystemLabel};
use crate::{Error, Result};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-random unitary via QR with the phase correction on `R`'s diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = gaussian_matrix(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let phase = r[(j, j)] / r[(j, j)].norm();
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Normalized random state of rank at most `rank` (induced measure).
pub fn density<R: Rng + ?Sized>(systems: Vec<SystemLabel>, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    let d = total_dim(&systems);
    let g = gaussian_matrix(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(systems, m.unscale(tr))
}

/// Haar-random pure state.
pub fn pure<R: Rng + ?Sized>(systems: Vec<SystemLabel>, rng: &mut R) -> Result<DensityOperator> {
    let psi = haar_vector(total_dim(&systems), rng);
    DensityOperator::pure(systems, &psi)
}

/// Random instrument from the QR isometry of a Gaussian matrix, split into
/// `outcomes * kraus` Kraus operators. Trace-decreasing instruments are
/// scaled by a random factor in `[0.3, 0.9]`.
pub fn instrument<R: Rng + ?Sized>(
    input: SystemLabel,
    output: Vec<SystemLabel>,
    register: &str,
    outcomes: usize,
    kraus: usize,
    trace_preserving: bool,
    rng: &mut R,
) -> Result<Instrument> {
    let din = input.dim;
    let dout = total_dim(&output);
    let rows = outcomes * kraus * dout;
    if rows < din {
        return Err(Error::InvalidParameter(format!(
            "{outcomes} outcomes x {kraus} Kraus x {dout} output dims cannot form an isometry on dimension {din}"
        )));
    }
    let v = gaussian_matrix(rows, din, rng).qr().q();
    let scale = if trace_preserving { 1.0 } else { rng.random_range(0.3f64..0.9).sqrt() };
    let ops = (0..outcomes)
        .map(|x| Outcome {
            label: x.to_string(),
            kraus: (0..kraus)
                .map(|k| v.rows((x * kraus + k) * dout, dout).into_owned().scale(scale))
                .collect(),
        })
        .collect();
    Instrument::new(vec![input], output, register, ops)
}

/// Random normalized cq state with register `X` and quantum side system `B`.
pub fn cq_state<R: Rng + ?Sized>(dx: usize, db: usize, rng: &mut R) -> Result<CqState> {
    let mut blocks: Vec<CMat> = (0..dx)
        .map(|_| {
            let g = gaussian_matrix(db, rng.random_range(1..=db), rng);
            let w: f64 = rng.random_range(0.05..1.0);
            (&g * g.adjoint()).scale(w)
        })
        .collect();
    let tr: f64 = blocks.iter().map(|b| b.trace().re).sum();
    for b in &mut blocks {
        *b = b.unscale(tr);
    }
    CqState::new(
        SystemLabel::classical("X", dx),
        vec![SystemLabel::quantum("B", db)],
        blocks,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(5, &mut rng);
        assert_abs_diff_eq!((u.adjoint() * &u - CMat::identity(5, 5)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = density(vec![SystemLabel::quantum("A", 3)], 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = density(vec![SystemLabel::quantum("A", 3)], 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
