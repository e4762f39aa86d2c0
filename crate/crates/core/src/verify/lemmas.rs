use serde::Serialize;

use crate::bitlinalg::BitMatrix;
use crate::entropy::{self, Bipartite, EntropyResult};
use crate::quantum::linalg::{self, CMat, Eigh};
use crate::quantum::{trace_norm, CqState, DensityOperator, Instrument, Outcome, SystemLabel};
use crate::{Error, Result};

use super::instances::bits;

/// Relative tolerance for the exact inequality checks.
const INEQ_TOL: f64 = 1e-12;

/// Both sides of `||rho_ZE - omega_Z (x) rho_E||_1^2 <=
/// 2^m sum_{s != 0} ||rho_{(s.Z)E} - omega (x) rho_E||_1^2`.
#[derive(Clone, Debug, Serialize)]
pub struct XorReport {
    pub m: usize,
    pub dim_e: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn distance_from_uniform(cq: &CqState) -> Result<f64> {
    let side = cq.side_state().unscale(cq.register().dim as f64);
    cq.blocks().iter().map(|b| trace_norm(&(b - &side))).sum()
}

/// Evaluates both sides of the classical-quantum XOR inequality exactly. The
/// register must have dimension `2^m`.
pub fn check_xor_lemma(rho: &CqState) -> Result<XorReport> {
    let dz = rho.register().dim;
    if !dz.is_power_of_two() || dz < 2 {
        return Err(Error::InvalidParameter(format!("register dimension {dz} is not 2^m with m >= 1")));
    }
    let m = dz.trailing_zeros() as usize;
    let lhs = distance_from_uniform(rho)?.powi(2);
    let mut sum = 0.0;
    for s in 1..dz {
        let parity = rho.map_register("P", 2, |z| ((z & s).count_ones() % 2) as usize)?;
        sum += distance_from_uniform(&parity)?.powi(2);
    }
    let rhs = dz as f64 * sum;
    Ok(XorReport {
        m,
        dim_e: rho.side_dim(),
        lhs,
        rhs,
        holds: lhs <= rhs + INEQ_TOL * rhs.max(1.0),
    })
}

/// `H_min(KX|R)` against `H_min(X|R) - r` for `r = n - rank K`.
#[derive(Clone, Debug, Serialize)]
pub struct RankEntropyReport {
    pub n: usize,
    pub r: usize,
    pub h_x: EntropyResult,
    pub h_kx: EntropyResult,
    /// `h_kx.upper - (h_x.lower - r)`; negative means violated.
    pub margin: f64,
    pub holds: bool,
}

/// Applies `x -> Kx` to the register of a cq state with `2^n` values and
/// compares min-entropies.
pub fn check_rank_entropy(rho: &CqState, k: &BitMatrix, gap: f64, tol: f64) -> Result<RankEntropyReport> {
    let n = k.ncols();
    if rho.register().dim != 1 << n || k.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: rho.register().dim,
        });
    }
    let images: Vec<usize> = (0..1usize << n)
        .map(|x| k.matvec(&bits(x, n)).map(|v| v.to_u64() as usize))
        .collect::<Result<_>>()?;
    let kx = rho.map_register("KX", 1 << n, |x| images[x])?;
    let r = n - k.rank();
    let h_x = entropy::h_min(&Bipartite::from_cq(rho), gap)?;
    let h_kx = entropy::h_min(&Bipartite::from_cq(&kx), gap)?;
    let margin = h_kx.upper - (h_x.lower - r as f64);
    Ok(RankEntropyReport {
        n,
        r,
        holds: margin >= -tol,
        h_x,
        h_kx,
        margin,
    })
}

/// The measurement `M_{X|B'}` with `M^x*[1] = (rho_B^-1/2 rho_x rho_B^-1/2)^T`
/// on the primed copy of the side systems. Applied to the canonical
/// purification of `rho_B` it returns `rho_XB`.
pub fn alt_model_channel(rho: &CqState) -> Result<Instrument> {
    let rho_b = rho.side_state();
    let eig = Eigh::new(&rho_b);
    if eig.max() <= 0.0 {
        return Err(Error::Support("side state is zero".into()));
    }
    let inv_root = linalg::psd_power(&rho_b, -0.5);
    let projector = &inv_root * &rho_b * &inv_root;
    let outcomes = rho
        .blocks()
        .iter()
        .enumerate()
        .map(|(x, block)| {
            let leak = linalg::max_abs(&(block - &projector * block * &projector));
            if leak > 1e-9 * linalg::max_abs(block).max(1e-12) {
                return Err(Error::Support(format!("block {x} leaves the support of rho_B by {leak:e}")));
            }
            let f = linalg::hermitize(&linalg::transpose(&(&inv_root * block * &inv_root)));
            let fe = Eigh::new(&f);
            let cut = fe.support_cutoff();
            let kraus = fe
                .values
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > cut)
                .map(|(k, &l)| CMat::from_fn(1, f.nrows(), |_, j| fe.vectors[(j, k)].conj() * l.sqrt()))
                .collect();
            Ok(Outcome {
                label: x.to_string(),
                kraus,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let input = rho
        .systems()
        .iter()
        .map(|s| SystemLabel::quantum(format!("{}'", s.name), s.dim))
        .collect();
    Instrument::new(input, Vec::new(), rho.register().name.clone(), outcomes)
}

/// Round trip of [`alt_model_channel`] through the canonical purification.
#[derive(Clone, Debug, Serialize)]
pub struct AltModelReport {
    pub outcomes: usize,
    pub dim_b: usize,
    /// Largest entry of `M[sigma_BB'] - rho_XB`.
    pub error: f64,
    pub holds: bool,
}

pub const ALT_MODEL_TOL: f64 = 1e-9;

pub fn check_alt_model(rho: &CqState) -> Result<AltModelReport> {
    let channel = alt_model_channel(rho)?;
    let systems: Vec<SystemLabel> = rho
        .systems()
        .iter()
        .map(|s| SystemLabel::quantum(s.name.clone(), s.dim))
        .collect();
    let sigma = if systems.is_empty() {
        DensityOperator::new(
            vec![SystemLabel::quantum("R", 1)],
            linalg::identity(1).scale(rho.trace()),
        )?
    } else {
        DensityOperator::new(systems, rho.side_state())?
    };
    let purified = sigma.purify()?;
    let back = channel.apply(&purified)?;
    let error = rho
        .blocks()
        .iter()
        .zip(back.blocks())
        .map(|(a, b)| linalg::max_abs(&(a - b)))
        .fold(0.0, f64::max);
    Ok(AltModelReport {
        outcomes: channel.num_outcomes(),
        dim_b: rho.side_dim(),
        error,
        holds: error <= ALT_MODEL_TOL,
    })
}
