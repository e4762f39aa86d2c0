//! Exact small-instance oracles for the extraction bounds, the lemmas they
//! rest on, and generators for the known counterexamples.
//!
//! Every check builds the relevant state exactly and evaluates trace
//! distances by full eigendecomposition. Random suites derive the seed of
//! instance `i` as `seed + i` and record it in the report, so any single
//! instance can be replayed.

mod instances;
mod lemmas;
mod scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitlinalg::{BitMatrix, MatrixFamily};
use crate::extractor::ExtractorSpec;
use crate::par::{self, ExecMode};
use crate::quantum::random;
use crate::Result;

pub use instances::{
    build_eta_nu, check_counterexample, gen_markov_counterexample, gen_sn_distribution, gen_tightness,
    identity_family, markov_ceiling, random_instance, CounterexampleReport, JointDistribution, MarkovCounterexample,
    COUNTEREXAMPLE_HMIN, COUNTEREXAMPLE_TOL,
};
pub use lemmas::{
    alt_model_channel, check_alt_model, check_rank_entropy, check_xor_lemma, AltModelReport, RankEntropyReport,
    XorReport, ALT_MODEL_TOL,
};
pub use scenario::{
    check_bound, check_deor_bound, check_ip_bound, deor_bound, epsilon_of, ip_bound, measured_epsilon, BoundReport,
    ScenarioInstance, BOUND_SLACK, PURE_TOL,
};

/// Largest dimension of `A`, `B`, `S`, `T` in random scenarios.
pub const RANDOM_MAX_DIM: usize = 4;

/// Seed of instance `i` in a suite started from `seed`.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Runs `f` on `count` independently seeded instances, keeping input order.
pub fn run_seeded<T, F>(mode: ExecMode, seed: u64, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    par::map_indexed(mode, count, |i| {
        let s = instance_seed(seed, i);
        f(s, &mut ChaCha8Rng::seed_from_u64(s))
    })
    .into_iter()
    .collect()
}

/// Random inner-product scenarios with `n <= 4`, strong in `Y`.
pub fn ip_bound_suite(mode: ExecMode, seed: u64, count: usize, gap: f64) -> Result<Vec<BoundReport>> {
    run_seeded(mode, seed, count, |s, rng| {
        let n = rng.random_range(1..=4);
        let inst = random_instance(ExtractorSpec::ip(n)?, true, RANDOM_MAX_DIM, rng)?;
        let mut report = check_ip_bound(&inst, gap)?;
        report.seed = Some(s);
        Ok(report)
    })
}

/// The `(construction, n, m)` combinations covered by [`deor_bound_suite`].
pub fn deor_suite_families() -> Result<Vec<MatrixFamily>> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for m in [1, 2] {
            out.push(MatrixFamily::field(n, m)?);
        }
    }
    for m in [1, 2] {
        out.push(MatrixFamily::circulant(3, m)?);
    }
    Ok(out)
}

/// Random DEOR scenarios cycling through [`deor_suite_families`].
pub fn deor_bound_suite(mode: ExecMode, seed: u64, count: usize, gap: f64) -> Result<Vec<BoundReport>> {
    let families = deor_suite_families()?;
    let base = seed;
    par::map_indexed(mode, count, |i| {
        let s = instance_seed(base, i);
        let rng = &mut ChaCha8Rng::seed_from_u64(s);
        let family = families[i % families.len()].clone();
        let inst = random_instance(ExtractorSpec::deor(family), true, RANDOM_MAX_DIM, rng)?;
        let mut report = check_deor_bound(&inst, gap)?;
        report.seed = Some(s);
        Ok(report)
    })
    .into_iter()
    .collect()
}

/// Largest deviation between measured distance and bound at tightness.
pub const TIGHTNESS_TOL: f64 = 1e-12;

/// The half/half instance for `n = 2, 4, 6`. A report passes only if the
/// measured distance also equals the bound.
pub fn tightness_suite(gap: f64) -> Result<Vec<BoundReport>> {
    [2, 4, 6]
        .into_iter()
        .map(|n| {
            let mut report = check_ip_bound(&gen_tightness(n)?, gap)?;
            report.pass &= (report.measured - report.bound).abs() <= TIGHTNESS_TOL;
            Ok(report)
        })
        .collect()
}

/// Random cq states with `m <= 3` output bits and `dim E <= 8`.
pub fn xor_suite(mode: ExecMode, seed: u64, count: usize) -> Result<Vec<XorReport>> {
    run_seeded(mode, seed, count, |_, rng| {
        let m = rng.random_range(1..=3);
        let de = rng.random_range(1..=8);
        check_xor_lemma(&random::cq_state(1 << m, de, rng)?)
    })
}

/// Random cq states with up to 4 outcomes and `dim B <= 8`.
pub fn alt_model_suite(mode: ExecMode, seed: u64, count: usize) -> Result<Vec<AltModelReport>> {
    run_seeded(mode, seed, count, |_, rng| {
        let dx = rng.random_range(2..=4);
        let db = rng.random_range(1..=8);
        check_alt_model(&random::cq_state(dx, db, rng)?)
    })
}

/// Random `n x n` matrix over GF(2), `n <= 3`, with random cq states on
/// `2^n` values.
pub fn rank_entropy_suite(mode: ExecMode, seed: u64, count: usize, gap: f64, tol: f64) -> Result<Vec<RankEntropyReport>> {
    run_seeded(mode, seed, count, |_, rng| {
        let n = rng.random_range(1..=3);
        let k = BitMatrix::from_fn(n, n, |_, _| rng.random_bool(0.5));
        let db = rng.random_range(1..=4);
        check_rank_entropy(&random::cq_state(1 << n, db, rng)?, &k, gap, tol)
    })
}

#[cfg(test)]
mod tests;
