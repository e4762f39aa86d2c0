//! Conditional entropies in bits: the closed-form sandwiched quantities
//! `H_inf_down` and `H_2_down`, the min-entropy `H_min` by semidefinite
//! programming with primal and dual certificates, guessing probabilities, the
//! collision functional of an instrument, and the smoothing penalty.
//!
//! Sub-normalized states use unnormalized divergences throughout, so for
//! example `H_inf_down(A|B) = -log lambda_max((1 (x) rho_B^-1/2) rho (1 (x) rho_B^-1/2))`.

pub mod sdp;

use serde::Serialize;

use crate::quantum::linalg::{self, CMat, Eigh};
use crate::quantum::{CqState, DensityOperator, Instrument, STATE_TOL};
use crate::{Error, Result};
use sdp::{Block, SdpProblem};

/// Default SDP gap in bits.
pub const DEFAULT_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    ClosedForm,
    SdpPrimalDual,
}

/// An entropy value with a certified bracket `lower <= value <= upper`.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: CertificateKind,
    pub iterations: usize,
    /// Feasible `sigma_B` (SDP results only), on the full `B` space.
    #[serde(skip)]
    pub sigma: Option<CMat>,
    /// Dual operators, one per block. For cq inputs these form a POVM on `B`
    /// whose success probability is `2^-upper`.
    #[serde(skip)]
    pub dual: Option<Vec<CMat>>,
}

impl EntropyResult {
    fn exact(value: f64) -> Self {
        Self {
            value,
            lower: value,
            upper: value,
            kind: CertificateKind::ClosedForm,
            iterations: 0,
            sigma: None,
            dual: None,
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A state on `A (x) B` as a direct sum of blocks on `A_k (x) B`. A classical
/// `A` gives one block per value with `dim A_k = 1`; a quantum `A` gives a
/// single block.
#[derive(Clone, Debug)]
pub struct Bipartite {
    dim_b: usize,
    blocks: Vec<Block>,
}

impl Bipartite {
    pub fn new(dim_b: usize, blocks: Vec<(usize, CMat)>) -> Result<Self> {
        let blocks = blocks
            .into_iter()
            .map(|(dim_a, rho)| {
                if rho.nrows() != dim_a * dim_b || rho.ncols() != dim_a * dim_b {
                    return Err(Error::DimensionMismatch {
                        expected: dim_a * dim_b,
                        got: rho.nrows(),
                    });
                }
                Ok(Block { dim_a, rho })
            })
            .collect::<Result<Vec<_>>>()?;
        if blocks.is_empty() {
            return Err(Error::InvalidState("no blocks".into()));
        }
        Ok(Self { dim_b, blocks })
    }

    /// Register `X` as `A`, every side system as `B`.
    pub fn from_cq(cq: &CqState) -> Self {
        Self {
            dim_b: cq.side_dim(),
            blocks: cq.blocks().iter().map(|b| Block { dim_a: 1, rho: b.clone() }).collect(),
        }
    }

    /// Bipartition of a dense state; systems in neither list are traced out.
    pub fn from_state(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<Self> {
        let order: Vec<&str> = a.iter().chain(b).copied().collect();
        let reduced = rho.reduce(&order)?;
        let dim_a: usize = a.iter().map(|n| reduced.system(n).map(|s| s.dim)).product::<Result<usize>>()?;
        let dim_b = reduced.dim() / dim_a;
        let classical = a.iter().all(|n| reduced.system(n).map(|s| s.classical).unwrap_or(false));
        if classical && !a.is_empty() {
            let blocks = (0..dim_a)
                .map(|x| Block {
                    dim_a: 1,
                    rho: linalg::block(reduced.matrix(), dim_b, x, x),
                })
                .collect();
            Ok(Self { dim_b, blocks })
        } else {
            Ok(Self {
                dim_b,
                blocks: vec![Block {
                    dim_a,
                    rho: reduced.matrix().clone(),
                }],
            })
        }
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| linalg::trace_re(&b.rho)).sum()
    }

    pub fn rho_b(&self) -> CMat {
        let d = self.dim_b;
        let mut out = CMat::zeros(d, d);
        for b in &self.blocks {
            out += linalg::partial_trace(&b.rho, &[b.dim_a, d], &[false, true]);
        }
        out
    }

    /// Restricts `B` to the support of `rho_B`. Returns the compressed state
    /// and the isometry `U` (columns span the support).
    fn compress(&self) -> (Self, CMat) {
        let u = Eigh::new(&self.rho_b()).support_basis();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let lift = linalg::lift_right(b.dim_a, &u);
                Block {
                    dim_a: b.dim_a,
                    rho: linalg::hermitize(&(lift.adjoint() * &b.rho * &lift)),
                }
            })
            .collect();
        (
            Self {
                dim_b: u.ncols(),
                blocks,
            },
            u,
        )
    }

    /// Checks that each block lives on `A (x) supp(rho_B)`.
    fn check_support(&self, u: &CMat) -> Result<()> {
        let p = u * u.adjoint();
        for b in &self.blocks {
            let lift = linalg::lift_right(b.dim_a, &p);
            let leak = linalg::max_abs(&(&b.rho - &lift * &b.rho * &lift));
            if leak > 1e-9 * linalg::max_abs(&b.rho).max(STATE_TOL) {
                return Err(Error::Support(format!(
                    "state has weight {leak:e} outside 1 (x) supp(rho_B)"
                )));
            }
        }
        Ok(())
    }

    /// `(1 (x) rho_B^p) rho_k (1 (x) rho_B^p)` on the compressed space.
    fn sandwiched(&self, p: f64) -> Result<Vec<CMat>> {
        let (small, u) = self.compress();
        self.check_support(&u)?;
        let root = linalg::psd_power(&small.rho_b(), p);
        Ok(small
            .blocks
            .iter()
            .map(|b| {
                let lift = linalg::lift_right(b.dim_a, &root);
                linalg::hermitize(&(&lift * &b.rho * &lift))
            })
            .collect())
    }

    fn lambda_inf(&self) -> Result<f64> {
        Ok(self
            .sandwiched(-0.5)?
            .iter()
            .map(|m| Eigh::new(m).max())
            .fold(0.0, f64::max))
    }
}

/// `H_inf_down(A|B)`.
pub fn h_inf_down(state: &Bipartite) -> Result<EntropyResult> {
    Ok(EntropyResult::exact(-state.lambda_inf()?.log2()))
}

/// `H_2_down(A|B) = -log tr[(rho_B^-1/4 rho rho_B^-1/4)^2]`.
pub fn h2_down(state: &Bipartite) -> Result<EntropyResult> {
    let s: f64 = state
        .sandwiched(-0.25)?
        .iter()
        .map(|m| (m * m).trace().re)
        .sum();
    Ok(EntropyResult::exact(-s.log2()))
}

/// `H_min(A|B) = -log min { tr sigma : 1 (x) sigma >= rho }`.
///
/// The reported `value` is the certified lower bound `-log tr sigma` of the
/// best feasible `sigma` found; `upper` comes from the rescaled dual point.
/// The closed-form `sigma = 2^-H_inf_down rho_B` competes as a primal
/// candidate, so `value >= H_inf_down` always.
pub fn h_min(state: &Bipartite, gap: f64) -> Result<EntropyResult> {
    if gap <= 0.0 {
        return Err(Error::InvalidParameter("gap must be positive".into()));
    }
    let tr = state.trace();
    if tr <= 0.0 {
        return Err(Error::InvalidState("zero state".into()));
    }
    let (small, u) = state.compress();
    state.check_support(&u)?;
    // Hmin(c rho) = Hmin(rho) - log c: solve the normalized problem.
    let blocks: Vec<Block> = small
        .blocks
        .iter()
        .filter(|b| linalg::trace_re(&b.rho) > 0.0)
        .map(|b| Block {
            dim_a: b.dim_a,
            rho: b.rho.unscale(tr),
        })
        .collect();
    let norm = Bipartite {
        dim_b: small.dim_b,
        blocks,
    };
    if norm.dim_b == 1 {
        let lmax = norm.blocks.iter().map(|b| linalg::lambda_max(&b.rho)).fold(0.0, f64::max);
        return Ok(EntropyResult::exact(-(lmax * tr).log2()));
    }
    let candidate = norm.rho_b().scale(norm.lambda_inf()?);
    let problem = SdpProblem {
        dim_b: norm.dim_b,
        blocks: norm.blocks.clone(),
        gap,
    };
    let sol = sdp::solve(&problem, Some(&candidate))?;
    let lower = -(sol.primal * tr).log2();
    let upper = -(sol.dual * tr).log2();
    // lift certificates back to the full B space
    let sigma = &u * sol.sigma.scale(tr) * u.adjoint();
    let kernel = linalg::identity(u.nrows()) - &u * u.adjoint();
    let mut dual = Vec::with_capacity(state.blocks.len());
    let mut nonzero = sol.dual_blocks.iter();
    for (k, b) in state.blocks.iter().enumerate() {
        let lift = linalg::lift_right(b.dim_a, &u);
        let mut l = if linalg::trace_re(&small.blocks[k].rho) > 0.0 {
            nonzero.next().map(|l| &lift * l * lift.adjoint()).unwrap_or_else(|| CMat::zeros(lift.nrows(), lift.nrows()))
        } else {
            CMat::zeros(lift.nrows(), lift.nrows())
        };
        if k == 0 && b.dim_a == 1 {
            l += &kernel;
        }
        dual.push(l);
    }
    Ok(EntropyResult {
        value: lower,
        lower,
        upper,
        kind: CertificateKind::SdpPrimalDual,
        iterations: sol.outer_iterations,
        sigma: Some(sigma),
        dual: Some(dual),
    })
}

/// Guessing probability of a cq state's register given its side systems,
/// with the bracket `lower <= value <= upper`.
#[derive(Clone, Debug, Serialize)]
pub struct GuessResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// POVM achieving `lower` (SDP results only).
    #[serde(skip)]
    pub povm: Option<Vec<CMat>>,
}

/// `p_guess(X|B) = 2^-H_min(X|B)`.
pub fn p_guess(cq: &CqState, gap: f64) -> Result<GuessResult> {
    let h = h_min(&Bipartite::from_cq(cq), gap)?;
    Ok(GuessResult {
        value: 2f64.powf(-h.value),
        lower: 2f64.powf(-h.upper),
        upper: 2f64.powf(-h.lower),
        iterations: h.iterations,
        povm: h.dual,
    })
}

/// `-log sum_y tr[(sigma^1/4 N^y*[1] sigma^1/4)^2]`.
pub fn k2_functional(n: &Instrument, sigma: &DensityOperator) -> Result<f64> {
    let din: usize = n.input().iter().map(|s| s.dim).product();
    if sigma.dim() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            got: sigma.dim(),
        });
    }
    let q = linalg::psd_power(sigma.matrix(), 0.25);
    let dout: usize = n.output().iter().map(|s| s.dim).product();
    let id = linalg::identity(dout);
    let mut total = 0.0;
    for y in 0..n.num_outcomes() {
        let m = &q * n.adjoint_apply(y, &id)? * &q;
        total += (&m * &m).trace().re;
    }
    Ok(-total.log2())
}

/// `log2(2 / eps^2 + 1 / (trace - eps))`.
pub fn smoothing_penalty(eps: f64, trace: f64) -> Result<f64> {
    if !(eps > 0.0 && trace <= 1.0 && eps < trace) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < trace <= 1, got eps={eps}, trace={trace}"
        )));
    }
    if trace - eps <= 1e-12 {
        return Err(Error::InvalidParameter("trace - eps is too close to zero".into()));
    }
    Ok((2.0 / (eps * eps) + 1.0 / (trace - eps)).log2())
}
