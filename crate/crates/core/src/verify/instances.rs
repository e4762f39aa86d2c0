use rand::Rng;
use serde::Serialize;

use crate::bitlinalg::{BitVector, MatrixFamily};
use crate::entropy::{self, Bipartite, EntropyResult};
use crate::extractor::ExtractorSpec;
use crate::quantum::linalg::{c, CMat, CVec};
use crate::quantum::{random, CqState, DensityOperator, Instrument, Outcome, SystemLabel};
use crate::{Error, Result};

use super::scenario::ScenarioInstance;

/// Reference value of `H_min(X|B)` for the Markov counterexample.
pub const COUNTEREXAMPLE_HMIN: f64 = 0.45689;

/// Tolerance on the counterexample value.
pub const COUNTEREXAMPLE_TOL: f64 = 1e-3;

/// `-log(3/4)`: the entropy any Markov extension must fall under.
pub fn markov_ceiling() -> f64 {
    -(0.75f64).log2()
}

const DIST_TOL: f64 = 1e-12;

/// A joint distribution `p(x, y)` on `{0,1}^n x {0,1}^n`, stored row-major
/// as `p[x * 2^n + y]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution {
    bits: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(bits: usize, probs: Vec<f64>) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::InvalidParameter(format!("need 1 <= bits <= 16, got {bits}")));
        }
        let size = 1usize << bits;
        if probs.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::InvalidState(format!("probability {p} is negative or NaN")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { bits, probs })
    }

    /// Uniform distribution on the listed `(x, y)` pairs.
    pub fn uniform_on(bits: usize, support: &[(usize, usize)]) -> Result<Self> {
        let size = 1usize << bits.min(16);
        let mut probs = vec![0.0; size * size];
        let w = 1.0 / support.len() as f64;
        for &(x, y) in support {
            if x >= size || y >= size {
                return Err(Error::InvalidParameter(format!("pair ({x}, {y}) out of range")));
            }
            probs[x * size + y] += w;
        }
        Self::new(bits, probs)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// `2^n`, the number of values per side.
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.size() + y]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.chunks(self.size()).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let size = self.size();
        (0..size).map(|y| (0..size).map(|x| self.p(x, y)).sum()).collect()
    }

    fn systems(&self) -> (SystemLabel, SystemLabel) {
        (
            SystemLabel::quantum("A", self.size()),
            SystemLabel::quantum("B", self.size()),
        )
    }

    /// `|rho>_AB = sum sqrt(p(x, y)) |x, y>`.
    pub fn pure_state(&self) -> Result<DensityOperator> {
        let (a, b) = self.systems();
        let psi = CVec::from_iterator(self.probs.len(), self.probs.iter().map(|p| c(p.sqrt())));
        DensityOperator::pure(vec![a, b], &psi)
    }

    /// Computational-basis measurements of `A` (register `X`) and `B`
    /// (register `Y`).
    pub fn measurements(&self) -> (Instrument, Instrument) {
        let (a, b) = self.systems();
        (Instrument::measurement(a, "X"), Instrument::measurement(b, "Y"))
    }
}

/// Uniform distribution on `{(x, y) : x . y = 0}`.
pub fn gen_sn_distribution(n: usize) -> Result<JointDistribution> {
    if !(1..=8).contains(&n) {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= 8, got {n}")));
    }
    let size = 1usize << n;
    let support: Vec<(usize, usize)> = (0..size)
        .flat_map(|x| (0..size).map(move |y| (x, y)))
        .filter(|&(x, y)| (x & y).count_ones() % 2 == 0)
        .collect();
    JointDistribution::uniform_on(n, &support)
}

/// Two-bit string to index, with bit `j` of the index taken from character `j`.
fn bits_index(s: &str) -> usize {
    s.bytes().enumerate().map(|(j, b)| usize::from(b == b'1') << j).sum()
}

/// Each row `x` is supported on two columns, every entry `1/8`.
const MARKOV_TABLE: [(&str, [&str; 2]); 4] = [
    ("00", ["00", "01"]),
    ("01", ["01", "10"]),
    ("10", ["10", "11"]),
    ("11", ["00", "11"]),
];

/// The two-bit distribution whose induced entropies exceed every Markov
/// extension's, with its pure state and computational-basis measurements.
#[derive(Clone, Debug)]
pub struct MarkovCounterexample {
    pub distribution: JointDistribution,
    pub state: DensityOperator,
    pub m: Instrument,
    pub n: Instrument,
}

pub fn gen_markov_counterexample() -> Result<MarkovCounterexample> {
    let support: Vec<(usize, usize)> = MARKOV_TABLE
        .iter()
        .flat_map(|(x, ys)| ys.iter().map(move |y| (bits_index(x), bits_index(y))))
        .collect();
    let distribution = JointDistribution::uniform_on(2, &support)?;
    let state = distribution.pure_state()?;
    let (m, n) = distribution.measurements();
    Ok(MarkovCounterexample {
        distribution,
        state,
        m,
        n,
    })
}

/// `eta_XB = sum_x p(x) |x><x| (x) |eta_x><eta_x|` with
/// `|eta_x> = sum_y sqrt(p(y|x)) |y>`, and `nu_YA` symmetrically.
pub fn build_eta_nu(p: &JointDistribution) -> Result<(CqState, CqState)> {
    if p.bits() > 3 {
        return Err(Error::InvalidParameter(format!("need n <= 3, got {}", p.bits())));
    }
    let size = p.size();
    let rank_one = |v: CVec| &v * v.adjoint();
    let eta = (0..size)
        .map(|x| rank_one(CVec::from_fn(size, |y, _| c(p.p(x, y).sqrt()))))
        .collect();
    let nu = (0..size)
        .map(|y| rank_one(CVec::from_fn(size, |x, _| c(p.p(x, y).sqrt()))))
        .collect();
    Ok((
        CqState::new(SystemLabel::classical("X", size), vec![SystemLabel::quantum("B", size)], eta)?,
        CqState::new(SystemLabel::classical("Y", size), vec![SystemLabel::quantum("A", size)], nu)?,
    ))
}

/// Both entropies of the Markov counterexample against the reference value
/// and the Markov ceiling.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub h_x_given_b: EntropyResult,
    pub h_y_given_a: EntropyResult,
    pub reference: f64,
    pub markov_ceiling: f64,
    pub matches_reference: bool,
    pub separated: bool,
    pub pass: bool,
}

pub fn check_counterexample(gap: f64) -> Result<CounterexampleReport> {
    let ce = gen_markov_counterexample()?;
    let hx = entropy::h_min(&Bipartite::from_cq(&ce.m.apply(&ce.state)?), gap)?;
    let hy = entropy::h_min(&Bipartite::from_cq(&ce.n.apply(&ce.state)?), gap)?;
    let ceiling = markov_ceiling();
    let matches_reference = [&hx, &hy]
        .iter()
        .all(|h| (h.value - COUNTEREXAMPLE_HMIN).abs() <= COUNTEREXAMPLE_TOL);
    let separated = hx.lower > ceiling && hy.lower > ceiling;
    Ok(CounterexampleReport {
        h_x_given_b: hx,
        h_y_given_a: hy,
        reference: COUNTEREXAMPLE_HMIN,
        markov_ceiling: ceiling,
        matches_reference,
        separated,
        pass: matches_reference && separated,
    })
}

/// `A`, `B` of dimension `2^(n/2)` in a uniform product state; `M` reads `a`
/// into the low half of `x`, `N` reads `b` into the high half of `y`, so the
/// inner product is always zero.
pub fn gen_tightness(n: usize) -> Result<ScenarioInstance> {
    if n == 0 || !n.is_multiple_of(2) || n > 6 {
        return Err(Error::InvalidParameter(format!("need even 2 <= n <= 6, got {n}")));
    }
    let half = n / 2;
    let d = 1usize << half;
    let a = SystemLabel::quantum("A", d);
    let b = SystemLabel::quantum("B", d);
    let psi = CVec::from_element(d * d, c(1.0 / d as f64));
    let rho = DensityOperator::pure(vec![a.clone(), b.clone()], &psi)?;
    let bra = |i: usize| CMat::from_fn(1, d, |_, j| c(if i == j { 1.0 } else { 0.0 }));
    let outcomes = |place: &dyn Fn(usize) -> Option<usize>| -> Vec<Outcome> {
        (0..1usize << n)
            .map(|v| Outcome {
                label: v.to_string(),
                kraus: place(v).map(bra).into_iter().collect(),
            })
            .collect()
    };
    let m = Instrument::new(vec![a], Vec::new(), "X", outcomes(&|x| (x < d).then_some(x)))?;
    let nn = Instrument::new(
        vec![b],
        Vec::new(),
        "Y",
        outcomes(&|y| (y % d == 0).then_some(y >> half)),
    )?;
    ScenarioInstance::new(rho, m, nn, ExtractorSpec::ip(n)?, true)
}

/// Pure state on `A (x) B` with a random Schmidt rank.
fn random_pure_ab<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> Result<DensityOperator> {
    let rank = rng.random_range(1..=da.min(db));
    let ua = random::haar_unitary(da, rng);
    let ub = random::haar_unitary(db, rng);
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut psi = CVec::zeros(da * db);
    for (k, w) in weights.iter().enumerate() {
        let amp = (w / total).sqrt();
        for i in 0..da {
            for j in 0..db {
                psi[i * db + j] += ua[(i, k)] * ub[(j, k)] * amp;
            }
        }
    }
    DensityOperator::pure(
        vec![SystemLabel::quantum("A", da), SystemLabel::quantum("B", db)],
        &psi,
    )
}

fn random_side_instrument<R: Rng + ?Sized>(
    input: SystemLabel,
    side: &str,
    register: &str,
    outcomes: usize,
    max_side: usize,
    rng: &mut R,
) -> Result<Instrument> {
    let ds = rng.random_range(1..=max_side);
    let output = if ds > 1 { vec![SystemLabel::quantum(side, ds)] } else { Vec::new() };
    let need = input.dim.div_ceil(outcomes * ds);
    let kraus = need.max(1) + usize::from(rng.random_bool(0.3));
    let tp = rng.random_bool(0.75);
    random::instrument(input, output, register, outcomes, kraus, tp, rng)
}

/// Random scenario: a pure `rho_AB` with random Schmidt rank and random
/// instruments with side outputs `S`, `T`. All of `A`, `B`, `S`, `T` have
/// dimension at most `max_dim`.
pub fn random_instance<R: Rng + ?Sized>(
    spec: ExtractorSpec,
    strong: bool,
    max_dim: usize,
    rng: &mut R,
) -> Result<ScenarioInstance> {
    if max_dim < 2 {
        return Err(Error::InvalidParameter("max_dim must be at least 2".into()));
    }
    let da = rng.random_range(2..=max_dim);
    let db = rng.random_range(2..=max_dim);
    let rho = random_pure_ab(da, db, rng)?;
    let outcomes = 1usize << spec.n();
    let m = random_side_instrument(SystemLabel::quantum("A", da), "S", "X", outcomes, max_dim, rng)?;
    let n = random_side_instrument(SystemLabel::quantum("B", db), "T", "Y", outcomes, max_dim, rng)?;
    ScenarioInstance::new(rho, m, n, spec, strong)
}

/// `Ext = DEOR` over the single identity matrix, which computes the inner
/// product.
pub fn identity_family(n: usize) -> Result<MatrixFamily> {
    MatrixFamily::explicit(vec![crate::bitlinalg::BitMatrix::identity(n)], 0)
}

/// `x` as an `n`-bit vector.
pub(crate) fn bits(x: usize, n: usize) -> BitVector {
    BitVector::from_u64(x as u64, n)
}
