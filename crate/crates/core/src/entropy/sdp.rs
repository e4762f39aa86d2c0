//! Dense log-barrier solver for
//!
//! ```text
//! minimize tr[sigma]  subject to  1_{A_k} (x) sigma >= rho_k  for every block k,
//! ```
//!
//! the primal form of the conditional min-entropy. `sigma` is parameterized
//! by its coordinates in an orthonormal Hermitian basis, and each centering
//! step is a damped Newton iteration on
//! `t tr[sigma] - sum_k log det(1 (x) sigma - rho_k)`.
//!
//! The dual is `max sum_k tr[rho_k L_k]` over `L_k >= 0` with
//! `sum_k tr_{A_k} L_k = 1`. Near the central path `L_k = W_k^{-1} / t` is
//! almost feasible; conjugating by `N^{-1/2}`, `N = sum_k tr_A L_k`, makes it
//! exactly feasible, so every reported bracket is rigorous up to rounding.

use nalgebra::{DMatrix, DVector};

use crate::quantum::linalg::{self, c, CMat, Eigh, C64};
use crate::{Error, Result};

/// Newton decrement below which a barrier subproblem counts as centered.
pub const CENTERING_TOL: f64 = 1e-6;
/// Outer (barrier) iteration cap.
pub const MAX_OUTER: usize = 200;
const MAX_INNER: usize = 60;

/// One constraint block: `1_{dim_a} (x) sigma >= rho`.
#[derive(Clone, Debug)]
pub struct Block {
    pub dim_a: usize,
    pub rho: CMat,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub dim_b: usize,
    pub blocks: Vec<Block>,
    /// Target `log2(primal / dual)`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// `tr[sigma]` of the best feasible `sigma`.
    pub primal: f64,
    /// Objective of the rescaled dual point.
    pub dual: f64,
    pub sigma: CMat,
    /// Dual operators `L_k`, one per block.
    pub dual_blocks: Vec<CMat>,
    pub newton_steps: usize,
    pub outer_iterations: usize,
}

impl SdpSolution {
    pub fn gap_bits(&self) -> f64 {
        (self.primal / self.dual).log2()
    }
}

/// Entry list `(row, col, coefficient)` of a basis element.
type BasisElement = Vec<(usize, usize, C64)>;

/// Orthonormal basis of `d x d` Hermitian matrices under `tr[A B]`.
fn hermitian_basis(d: usize) -> Vec<BasisElement> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis: Vec<BasisElement> = (0..d).map(|i| vec![(i, i, c(1.0))]).collect();
    for i in 0..d {
        for j in i + 1..d {
            basis.push(vec![(i, j, c(h)), (j, i, c(h))]);
            basis.push(vec![(i, j, C64::new(0.0, h)), (j, i, C64::new(0.0, -h))]);
        }
    }
    basis
}

fn to_matrix(basis: &[BasisElement], x: &DVector<f64>, d: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for (e, &coef) in basis.iter().zip(x.iter()) {
        for &(i, j, a) in e {
            m[(i, j)] += a * coef;
        }
    }
    m
}

/// `Re tr[E m]` for each basis element.
fn coordinates(basis: &[BasisElement], m: &CMat) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis.iter().map(|e| e.iter().map(|&(i, j, a)| (a * m[(j, i)]).re).sum()),
    )
}

struct Barrier<'a> {
    problem: &'a SdpProblem,
    basis: Vec<BasisElement>,
}

impl<'a> Barrier<'a> {
    fn slack(&self, sigma: &CMat) -> Vec<CMat> {
        self.problem
            .blocks
            .iter()
            .map(|b| linalg::lift_right(b.dim_a, sigma) - &b.rho)
            .collect()
    }

    /// Inverses of all slacks, or `None` if one is not positive definite.
    fn inverses(&self, sigma: &CMat) -> Option<Vec<CMat>> {
        self.slack(sigma)
            .into_iter()
            .map(|w| w.cholesky().map(|ch| ch.inverse()))
            .collect()
    }

    fn gradient_and_hessian(&self, t: f64, inv: &[CMat]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.problem.dim_b;
        let nvar = self.basis.len();
        // M = sum_k tr_A V_k and the factor lists of the Hessian: with
        // T[(q,i),(j,p)] = sum_terms L[q,i] R[j,p],
        // H_lm = Re sum_{(i,j,a) in E_l} sum_{(p,q,b) in E_m} a b T[(q,i),(j,p)].
        let mut m = CMat::zeros(d, d);
        let nterms: usize = self.problem.blocks.iter().map(|b| b.dim_a * b.dim_a).sum();
        let mut lmat = CMat::zeros(d * d, nterms);
        let mut rmat = CMat::zeros(d * d, nterms);
        let mut col = 0;
        for (b, v) in self.problem.blocks.iter().zip(inv) {
            for a in 0..b.dim_a {
                m += linalg::block(v, d, a, a);
                for a2 in 0..b.dim_a {
                    let l = linalg::block(v, d, a, a2);
                    let r = linalg::block(v, d, a2, a);
                    for x in 0..d {
                        for y in 0..d {
                            lmat[(x * d + y, col)] = l[(x, y)];
                            rmat[(x * d + y, col)] = r[(x, y)];
                        }
                    }
                    col += 1;
                }
            }
        }
        let tt = lmat * rmat.transpose();
        let mut grad = coordinates(&self.basis, &m).scale(-1.0);
        for i in 0..d {
            grad[i] += t;
        }
        let mut hess = DMatrix::zeros(nvar, nvar);
        for (l, el) in self.basis.iter().enumerate() {
            for (mi, em) in self.basis.iter().enumerate().skip(l) {
                let mut acc = C64::new(0.0, 0.0);
                for &(i, j, a) in el {
                    for &(p, q, b) in em {
                        acc += a * b * tt[(q * d + i, j * d + p)];
                    }
                }
                hess[(l, mi)] = acc.re;
                hess[(mi, l)] = acc.re;
            }
        }
        (grad, hess)
    }

    /// Rescaled dual point and its objective for the current iterate.
    fn dual_point(&self, t: f64, inv: &[CMat]) -> Option<(f64, Vec<CMat>)> {
        let d = self.problem.dim_b;
        let lams: Vec<CMat> = inv.iter().map(|v| v.unscale(t)).collect();
        let mut n = CMat::zeros(d, d);
        for (b, l) in self.problem.blocks.iter().zip(&lams) {
            for a in 0..b.dim_a {
                n += linalg::block(l, d, a, a);
            }
        }
        let eig = Eigh::new(&n);
        if eig.min() <= 0.0 {
            return None;
        }
        let n_inv_half = eig.map(|v| v.powf(-0.5));
        let mut value = 0.0;
        let mut scaled = Vec::with_capacity(lams.len());
        for (b, l) in self.problem.blocks.iter().zip(lams) {
            let s = linalg::lift_right(b.dim_a, &n_inv_half);
            let l2 = linalg::hermitize(&(&s * l * &s));
            value += (&b.rho * &l2).trace().re;
            scaled.push(l2);
        }
        Some((value, scaled))
    }
}

/// Solves the problem from the strictly feasible start
/// `sigma_0 = (1 + lambda_max) 1`. `candidate` is an optional extra feasible
/// `sigma` (for example a closed-form one) that competes for the primal bound.
pub fn solve(problem: &SdpProblem, candidate: Option<&CMat>) -> Result<SdpSolution> {
    let d = problem.dim_b;
    if problem.gap <= 0.0 {
        return Err(Error::InvalidParameter("gap must be positive".into()));
    }
    let barrier = Barrier {
        problem,
        basis: hermitian_basis(d),
    };
    let lmax = problem
        .blocks
        .iter()
        .map(|b| linalg::lambda_max(&b.rho))
        .fold(0.0, f64::max);
    let mut x = coordinates(&barrier.basis, &linalg::identity(d).scale(1.0 + lmax));
    let nu: usize = problem.blocks.iter().map(|b| b.dim_a * d).sum();

    let mut best_sigma = to_matrix(&barrier.basis, &x, d);
    let mut best_primal = linalg::trace_re(&best_sigma);
    if let Some(cand) = candidate {
        let tr = linalg::trace_re(cand);
        if tr < best_primal && barrier.inverses(cand).is_some() {
            best_primal = tr;
            best_sigma = cand.clone();
        }
    }
    let mut best_dual = 0.0;
    let mut best_dual_blocks = Vec::new();
    let mut newton_steps = 0;
    let mut mu = 1.0;

    for outer in 1..=MAX_OUTER {
        let t = 1.0 / mu;
        for _ in 0..MAX_INNER {
            let sigma = to_matrix(&barrier.basis, &x, d);
            let Some(inv) = barrier.inverses(&sigma) else {
                break;
            };
            let (grad, hess) = barrier.gradient_and_hessian(t, &inv);
            let Some(step) = newton_direction(&hess, &grad) else {
                break;
            };
            let decrement = (-grad.dot(&step)).max(0.0).sqrt();
            if decrement <= CENTERING_TOL {
                break;
            }
            let mut s = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &x + step.scale(s);
                if barrier.inverses(&to_matrix(&barrier.basis, &trial, d)).is_some() {
                    x = trial;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            newton_steps += 1;
            if !accepted {
                break;
            }
        }

        let sigma = to_matrix(&barrier.basis, &x, d);
        if let Some(inv) = barrier.inverses(&sigma) {
            let tr = linalg::trace_re(&sigma);
            if tr < best_primal {
                best_primal = tr;
                best_sigma = linalg::hermitize(&sigma);
            }
            if let Some((value, blocks)) = barrier.dual_point(t, &inv) {
                if value > best_dual {
                    best_dual = value;
                    best_dual_blocks = blocks;
                }
            }
        }
        let solution = || SdpSolution {
            primal: best_primal,
            dual: best_dual,
            sigma: best_sigma.clone(),
            dual_blocks: best_dual_blocks.clone(),
            newton_steps,
            outer_iterations: outer,
        };
        if best_dual > 0.0 && (best_primal / best_dual).log2() <= problem.gap {
            return Ok(solution());
        }
        // central-path gap nu / t is far below double precision: stop
        if mu * (nu as f64) < 1e-15 * best_primal {
            let sol = solution();
            return Err(stalled(&sol));
        }
        mu *= 0.5;
    }
    let sol = SdpSolution {
        primal: best_primal,
        dual: best_dual,
        sigma: best_sigma,
        dual_blocks: best_dual_blocks,
        newton_steps,
        outer_iterations: MAX_OUTER,
    };
    Err(stalled(&sol))
}

fn stalled(sol: &SdpSolution) -> Error {
    Error::SolverStalled {
        lower: -sol.primal.log2(),
        upper: if sol.dual > 0.0 { -sol.dual.log2() } else { f64::INFINITY },
        iterations: sol.outer_iterations,
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -grad;
    if let Some(ch) = hess.clone().cholesky() {
        return Some(ch.solve(&rhs));
    }
    // Rounding can make a nearly singular Hessian indefinite; regularize.
    let scale = hess.diagonal().amax().max(1.0);
    let n = hess.nrows();
    let reg = hess + DMatrix::identity(n, n).scale(1e-12 * scale);
    reg.cholesky().map(|ch| ch.solve(&rhs))
}
