use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitlinalg::BitVector;
use crate::entropy::{self, Bipartite, EntropyResult};
use crate::par::{self, ExecMode};
use crate::quantum::linalg::{self, c, CMat, CVec};
use crate::quantum::{random, CqState, DensityOperator, Instrument, Outcome, SystemLabel, STATE_TOL};
use crate::{Error, Result};

/// Largest memory or environment dimension.
pub const SV_MAX_DIM: usize = 8;

/// Largest number of steps for the exact joint state.
pub const SV_EXACT_MAX_STEPS: usize = 8;

/// Tolerance on the chaining inequality, above the SDP gap.
pub const CHAIN_TOL: f64 = 1e-6;

const MEMORY: &str = "R";
const ENVIRONMENT: &str = "E";

/// One use of the source: measure the memory `R` in `basis` to get a control
/// value `c`, emit `X = 1` with probability `p_one[c]`, and leave the memory
/// in `next[2c + x]`.
///
/// Since `P(x|c) <= 1/2 + mu` for every `c`, the step satisfies the bias
/// condition against any side information about `R`.
#[derive(Clone, Debug)]
pub struct SvStep {
    pub basis: CMat,
    pub p_one: Vec<f64>,
    pub next: Vec<CVec>,
}

impl SvStep {
    fn validate(&self, mu: f64, d: usize) -> Result<()> {
        if self.basis.nrows() != d || self.basis.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.basis.nrows(),
            });
        }
        let dev = linalg::max_abs(&(self.basis.adjoint() * &self.basis - linalg::identity(d)));
        if dev > 1e-10 {
            return Err(Error::InvalidParameter(format!("step basis is not unitary (deviation {dev:e})")));
        }
        if self.p_one.len() != d || self.next.len() != 2 * d {
            return Err(Error::InvalidParameter(format!(
                "step needs {d} biases and {} next states, got {} and {}",
                2 * d,
                self.p_one.len(),
                self.next.len()
            )));
        }
        for &p in &self.p_one {
            if !(p >= 0.5 - mu - 1e-12 && p <= 0.5 + mu + 1e-12) {
                return Err(Error::InvalidParameter(format!("P(X=1|c) = {p} outside [1/2 - {mu}, 1/2 + {mu}]")));
            }
        }
        for v in &self.next {
            if v.len() != d || (v.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter("next memory states must be unit vectors".into()));
            }
        }
        Ok(())
    }

    /// Kraus operators `sqrt(P(x|c)) |next_{c,x}><u_c|` per outcome `x`.
    fn instrument(&self) -> Result<Instrument> {
        let d = self.basis.nrows();
        let outcomes = (0..2)
            .map(|x| Outcome {
                label: x.to_string(),
                kraus: (0..d)
                    .filter_map(|cc| {
                        let p = if x == 1 { self.p_one[cc] } else { 1.0 - self.p_one[cc] };
                        (p > 0.0).then(|| (&self.next[2 * cc + x] * self.basis.column(cc).adjoint()).scale(p.sqrt()))
                    })
                    .collect(),
            })
            .collect();
        let r = SystemLabel::quantum(MEMORY, d);
        Instrument::new(vec![r.clone()], vec![r], "X", outcomes)
    }
}

/// A quantum SV source with bias `mu`: an initial state on memory `R` and
/// adversary `E`, and one [`SvStep`] per output bit.
#[derive(Clone, Debug)]
pub struct SvSourceSpec {
    mu: f64,
    initial: DensityOperator,
    steps: Vec<SvStep>,
}

impl SvSourceSpec {
    /// `initial` must be on systems `R`, `E` in that order.
    pub fn new(mu: f64, initial: DensityOperator, steps: Vec<SvStep>) -> Result<Self> {
        if !(0.0..0.5).contains(&mu) {
            return Err(Error::InvalidParameter(format!("bias must lie in [0, 1/2), got {mu}")));
        }
        let names: Vec<&str> = initial.systems().iter().map(|s| s.name.as_str()).collect();
        if names != [MEMORY, ENVIRONMENT] {
            return Err(Error::LabelMismatch(format!("initial state must be on (R, E), got {names:?}")));
        }
        let d = initial.dims()[0];
        if d > SV_MAX_DIM || initial.dims()[1] > SV_MAX_DIM {
            return Err(Error::DimensionCap {
                dim: d.max(initial.dims()[1]),
                cap: SV_MAX_DIM,
            });
        }
        if (initial.trace() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState("initial state must be normalized".into()));
        }
        if steps.is_empty() {
            return Err(Error::InvalidParameter("source needs at least one step".into()));
        }
        for s in &steps {
            s.validate(mu, d)?;
        }
        Ok(Self { mu, initial, steps })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn steps(&self) -> &[SvStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn memory_dim(&self) -> usize {
        self.initial.dims()[0]
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    /// `-log(1/2 + mu)` per step.
    pub fn per_step_entropy(&self) -> f64 {
        -(0.5 + self.mu).log2()
    }

    fn trivial_initial(d: usize) -> Result<DensityOperator> {
        let mut psi = CVec::zeros(d);
        psi[0] = c(1.0);
        DensityOperator::pure(
            vec![SystemLabel::quantum(MEMORY, d), SystemLabel::quantum(ENVIRONMENT, 1)],
            &psi,
        )
    }

    fn constant_step(p_one: f64) -> SvStep {
        SvStep {
            basis: linalg::identity(1),
            p_one: vec![p_one],
            next: vec![CVec::from_element(1, c(1.0)); 2],
        }
    }

    /// Perfectly uniform bits.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::iid(0.0, n, 0.5)
    }

    /// Independent bits with `P(X = 1) = p_one`.
    pub fn iid(mu: f64, n: usize, p_one: f64) -> Result<Self> {
        Self::new(mu, Self::trivial_initial(1)?, vec![Self::constant_step(p_one); n])
    }

    /// Classical SV source whose memory carries a copy of the previous
    /// bits; `q(history)` gives `P(X_i = 1 | x^(i-1))`. Needs `n <= 4`.
    pub fn classical(mu: f64, n: usize, q: impl Fn(&[bool]) -> f64) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::InvalidParameter(format!("classical source supports 1 <= n <= 4, got {n}")));
        }
        let d = 1usize << (n - 1);
        let unit = |k: usize| {
            let mut v = CVec::zeros(d);
            v[k % d] = c(1.0);
            v
        };
        let steps = (0..n)
            .map(|i| SvStep {
                basis: linalg::identity(d),
                p_one: (0..d)
                    .map(|h| {
                        let history: Vec<bool> = (0..i).map(|j| (h >> (i - 1 - j)) & 1 == 1).collect();
                        q(&history)
                    })
                    .collect(),
                next: (0..2 * d).map(&unit).collect(),
            })
            .collect();
        Self::new(mu, Self::trivial_initial(d)?, steps)
    }

    /// Adversary holds a copy of the control values of every step, each of
    /// which pushes the bias to `1/2 + mu` in some direction. Needs `n <= 3`.
    pub fn fully_informed(mu: f64, n: usize) -> Result<Self> {
        if n == 0 || n > 3 {
            return Err(Error::InvalidParameter(format!("fully informed source supports 1 <= n <= 3, got {n}")));
        }
        let d = 1usize << n;
        let mut psi = CVec::zeros(d * d);
        for k in 0..d {
            psi[k * d + k] = c(1.0 / (d as f64).sqrt());
        }
        let initial = DensityOperator::pure(
            vec![SystemLabel::quantum(MEMORY, d), SystemLabel::quantum(ENVIRONMENT, d)],
            &psi,
        )?;
        let steps = (0..n)
            .map(|i| SvStep {
                basis: linalg::identity(d),
                p_one: (0..d)
                    .map(|cc| if (cc >> i) & 1 == 1 { 0.5 + mu } else { 0.5 - mu })
                    .collect(),
                next: (0..2 * d)
                    .map(|k| {
                        let mut v = CVec::zeros(d);
                        v[k / 2] = c(1.0);
                        v
                    })
                    .collect(),
            })
            .collect();
        Self::new(mu, initial, steps)
    }

    /// Random memory and environment dimensions, a random entangled initial
    /// state, Haar-random control bases and next states, and biases at the
    /// extremes `1/2 +- mu` with random direction.
    pub fn adversarial<R: Rng + ?Sized>(mu: f64, n: usize, rng: &mut R) -> Result<Self> {
        let d = rng.random_range(2..=4);
        let de = rng.random_range(1..=4);
        let systems = vec![SystemLabel::quantum(MEMORY, d), SystemLabel::quantum(ENVIRONMENT, de)];
        let initial = random::pure(systems, rng)?;
        let steps = (0..n)
            .map(|_| SvStep {
                basis: random::haar_unitary(d, rng),
                p_one: (0..d)
                    .map(|_| if rng.random_bool(0.5) { 0.5 + mu } else { 0.5 - mu })
                    .collect(),
                next: (0..2 * d).map(|_| random::haar_vector(d, rng)).collect(),
            })
            .collect();
        Self::new(mu, initial, steps)
    }
}

/// Exact joint state: register `X` with value `sum_i x_i 2^(n-i)` (first bit
/// most significant), side systems `R`, `E`.
pub fn simulate_exact(spec: &SvSourceSpec) -> Result<CqState> {
    exact_prefixes(spec).map(|mut states| states.pop().expect("at least one step"))
}

/// States after each step.
fn exact_prefixes(spec: &SvSourceSpec) -> Result<Vec<CqState>> {
    if spec.len() > SV_EXACT_MAX_STEPS {
        return Err(Error::DimensionCap {
            dim: 1 << spec.len(),
            cap: 1 << SV_EXACT_MAX_STEPS,
        });
    }
    let mut out: Vec<CqState> = Vec::with_capacity(spec.len());
    for step in &spec.steps {
        let inst = step.instrument()?;
        let next = match out.last() {
            None => inst.apply(&spec.initial)?,
            Some(prev) => prev.apply_instrument(&inst, "X")?,
        };
        out.push(next);
    }
    Ok(out)
}

/// One sampled run of the source, bit `i` of the result is `x_(i+1)`.
pub fn sample_trajectory<R: Rng + ?Sized>(spec: &SvSourceSpec, rng: &mut R) -> BitVector {
    let mut rho = linalg::partial_trace(spec.initial.matrix(), &spec.initial.dims(), &[true, false]);
    let mut bits = BitVector::zeros(spec.len());
    for (i, step) in spec.steps.iter().enumerate() {
        let d = step.basis.nrows();
        let probs: Vec<f64> = (0..d)
            .map(|k| {
                let u = step.basis.column(k);
                (u.adjoint() * &rho * u)[(0, 0)].re.max(0.0)
            })
            .collect();
        let total: f64 = probs.iter().sum();
        let mut t = rng.random::<f64>() * total;
        let mut control = d - 1;
        for (k, p) in probs.iter().enumerate() {
            if t < *p {
                control = k;
                break;
            }
            t -= p;
        }
        let x = rng.random_bool(step.p_one[control].clamp(0.0, 1.0));
        bits.set(i, x);
        let w = &step.next[2 * control + usize::from(x)];
        rho = w * w.adjoint();
    }
    bits
}

/// Register index of a trajectory, matching [`simulate_exact`].
pub fn trajectory_index(bits: &BitVector) -> usize {
    bits.iter().fold(0, |acc, b| (acc << 1) | usize::from(b))
}

/// `count` trajectories; trajectory `i` uses seed `seed + i`.
pub fn sample_trajectories(spec: &SvSourceSpec, seed: u64, count: usize, mode: ExecMode) -> Vec<BitVector> {
    par::map_indexed(mode, count, |i| {
        sample_trajectory(spec, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64)))
    })
}

/// One sampled trajectory plus, when small enough, the exact joint state.
#[derive(Clone, Debug)]
pub struct SvSimulation {
    pub seed: u64,
    pub bits: BitVector,
    pub state: Option<CqState>,
}

pub fn simulate_sv(spec: &SvSourceSpec, seed: u64) -> Result<SvSimulation> {
    let bits = sample_trajectory(spec, &mut ChaCha8Rng::seed_from_u64(seed));
    let state = if spec.len() <= SV_EXACT_MAX_STEPS {
        Some(simulate_exact(spec)?)
    } else {
        None
    };
    Ok(SvSimulation { seed, bits, state })
}

/// `H_min(X^n|E)` against `-n log(1/2 + mu)`, with the per-step values of
/// `H_inf_down(X_i | X^(i-1) E)` on the state actually reached.
#[derive(Clone, Debug, Serialize)]
pub struct ChainingReport {
    pub n: usize,
    pub mu: f64,
    pub bound: f64,
    pub h_min: EntropyResult,
    pub step_entropies: Vec<f64>,
    pub step_floor: f64,
    /// `h_min.value - bound`.
    pub margin: f64,
    pub pass: bool,
}

/// `min_h H_inf_down(X_i | E, X^(i-1) = h)` from the state after step `i`.
fn step_entropy(state: &CqState) -> Result<f64> {
    let reduced = state.partial_trace(&[MEMORY])?;
    let d = reduced.side_dim();
    let mut worst = f64::INFINITY;
    for h in 0..reduced.blocks().len() / 2 {
        let (b0, b1) = (reduced.block(2 * h), reduced.block(2 * h + 1));
        if linalg::trace_re(b0) + linalg::trace_re(b1) <= 1e-14 {
            continue;
        }
        let bp = Bipartite::new(d, vec![(1, b0.clone()), (1, b1.clone())])?;
        worst = worst.min(entropy::h_inf_down(&bp)?.value);
    }
    Ok(worst)
}

pub fn check_chaining(spec: &SvSourceSpec, gap: f64) -> Result<ChainingReport> {
    let states = exact_prefixes(spec)?;
    let step_entropies = states.iter().map(step_entropy).collect::<Result<Vec<_>>>()?;
    let last = states.last().expect("at least one step").partial_trace(&[MEMORY])?;
    let h_min = entropy::h_min(&Bipartite::from_cq(&last), gap)?;
    let k = spec.per_step_entropy();
    let bound = spec.len() as f64 * k;
    let margin = h_min.value - bound;
    let steps_ok = step_entropies.iter().all(|&h| h >= k - 1e-9);
    Ok(ChainingReport {
        n: spec.len(),
        mu: spec.mu,
        bound,
        step_floor: k,
        margin,
        pass: steps_ok && margin >= -CHAIN_TOL,
        h_min,
        step_entropies,
    })
}

/// Adversarial sources with `n = 1 + i % 4` steps and a bias drawn from
/// `[0.05, 0.45]`; instance `i` uses seed `seed + i`.
pub fn chaining_suite(mode: ExecMode, seed: u64, count: usize, gap: f64) -> Result<Vec<ChainingReport>> {
    par::map_indexed(mode, count, |i| {
        let rng = &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mu = rng.random_range(0.05..0.45);
        check_chaining(&SvSourceSpec::adversarial(mu, 1 + i % 4, rng)?, gap)
    })
    .into_iter()
    .collect()
}
