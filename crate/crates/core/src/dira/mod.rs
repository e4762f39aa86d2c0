//! Randomness amplification with a quantum SV source: a simulator for
//! sources whose per-bit bias is bounded against quantum side information,
//! an exact check that min-entropy chains across steps, and the output-length
//! calculator for the amplification protocol.
//!
//! The first-order rate `h` and the coefficient `c` of the `sqrt(n)`
//! correction are inputs; nothing here estimates them.

mod source;

use serde::Serialize;

use crate::{Error, Result};

pub use source::{
    chaining_suite, check_chaining, sample_trajectories, sample_trajectory, simulate_exact, simulate_sv, trajectory_index,
    ChainingReport, SvSimulation, SvSourceSpec, SvStep, CHAIN_TOL, SV_EXACT_MAX_STEPS, SV_MAX_DIM,
};

/// Protocol parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiraParams {
    /// Rounds.
    pub n: u64,
    /// Certified entropy rate per round, in bits.
    pub h: f64,
    /// Source bias.
    pub mu: f64,
    /// Target security.
    pub eps: f64,
    /// Smoothing parameter.
    pub eps_s: f64,
    /// Coefficient of the `sqrt(n)` correction.
    pub c: f64,
    /// Whether `Y` is published after extraction. A strong extractor keeps
    /// `Z` uniform given `Y`, so this changes no numbers.
    pub privatization: bool,
}

impl DiraParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return bad(format!("h must be finite and non-negative, got {}", self.h));
        }
        if !(0.0..0.5).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1/2), got {}", self.mu));
        }
        if !(self.eps_s > 0.0 && self.eps_s < self.eps && self.eps <= 1.0) {
            return bad(format!(
                "need 0 < eps_s < eps <= 1, got eps_s={}, eps={}",
                self.eps_s, self.eps
            ));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return bad(format!("c must be finite and non-negative, got {}", self.c));
        }
        Ok(())
    }

    /// `k2 = -log(1/2 + mu)`.
    pub fn k2(&self) -> f64 {
        -(0.5 + self.mu).log2()
    }
}

/// Output length with the rate-condition flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiraRate {
    pub m: u64,
    /// Set when `2 k2 + h <= 2` or the length expression is not positive.
    pub flag: bool,
    pub k2: f64,
    /// The length expression before flooring.
    pub raw: f64,
    pub privatization: bool,
}

/// `m = floor(n (2 k2 + h - 2) / 2 - log(1 / (2 (eps - eps_s))) - c sqrt(n))`.
pub fn dira_rate(p: &DiraParams) -> Result<DiraRate> {
    p.validate()?;
    let n = p.n as f64;
    let k2 = p.k2();
    let slope = 2.0 * k2 + p.h - 2.0;
    let raw = 0.5 * n * slope + (2.0 * (p.eps - p.eps_s)).log2() - p.c * n.sqrt();
    let flag = slope <= 0.0 || raw <= 0.0;
    let mut m = if flag { 0 } else { raw.floor() as u64 };
    // undo a rounding step past the target
    while m > 0 && dira_epsilon(p, m)? > p.eps {
        m -= 1;
    }
    Ok(DiraRate {
        m,
        flag,
        k2,
        raw,
        privatization: p.privatization,
    })
}

/// `log2` of `1/2 sqrt(2^(2m + 2n - nh + c sqrt(n) - 2 n k2))`.
pub fn dira_epsilon_log2(p: &DiraParams, m: u64) -> Result<f64> {
    p.validate()?;
    let n = p.n as f64;
    let radicand = 2.0 * m as f64 + 2.0 * n - n * p.h + p.c * n.sqrt() - 2.0 * n * p.k2();
    Ok(0.5 * radicand - 1.0)
}

/// `eps_s + 1/2 sqrt(2^(2m + 2n - nh + c sqrt(n) - 2 n k2))`.
pub fn dira_epsilon(p: &DiraParams, m: u64) -> Result<f64> {
    Ok(p.eps_s + dira_epsilon_log2(p, m)?.exp2())
}
