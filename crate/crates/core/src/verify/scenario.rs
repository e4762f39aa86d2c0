use serde::Serialize;

use crate::bitlinalg::BitVector;
use crate::entropy::{self, Bipartite, EntropyResult};
use crate::extractor::{ExtractorKind, ExtractorSpec};
use crate::quantum::{trace_norm, CqState, DensityOperator, Instrument};
use crate::{Error, Result};

/// Purity tolerance for scenario inputs.
pub const PURE_TOL: f64 = 1e-9;

/// Absolute slack added to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// A pure state `rho_AB`, instruments `M_{XS|A}` and `N_{YT|B}` with `2^n`
/// outcomes each, and the extractor applied to `(X, Y)`.
#[derive(Clone, Debug)]
pub struct ScenarioInstance {
    rho: DensityOperator,
    m: Instrument,
    n: Instrument,
    spec: ExtractorSpec,
    strong: bool,
}

impl ScenarioInstance {
    pub fn new(rho: DensityOperator, m: Instrument, n: Instrument, spec: ExtractorSpec, strong: bool) -> Result<Self> {
        if !rho.is_pure(PURE_TOL) {
            return Err(Error::InvalidState("scenario input must be pure; purify it first".into()));
        }
        let outcomes = 1usize
            .checked_shl(spec.n() as u32)
            .filter(|_| spec.n() < usize::BITS as usize)
            .ok_or_else(|| Error::InvalidParameter(format!("block size {} too large", spec.n())))?;
        for (inst, name) in [(&m, "M"), (&n, "N")] {
            if inst.num_outcomes() != outcomes {
                return Err(Error::InvalidInstrument(format!(
                    "{name} has {} outcomes, expected 2^{} = {outcomes}",
                    inst.num_outcomes(),
                    spec.n()
                )));
            }
        }
        let mut seen: Vec<&str> = Vec::new();
        for s in m.input().iter().chain(n.input()) {
            if seen.contains(&s.name.as_str()) {
                return Err(Error::LabelMismatch(format!("system {:?} is an input of both instruments", s.name)));
            }
            let own = rho.system(&s.name)?;
            if own.dim != s.dim {
                return Err(Error::LabelMismatch(format!(
                    "system {:?} has dimension {}, instrument expects {}",
                    s.name, own.dim, s.dim
                )));
            }
            seen.push(&s.name);
        }
        if seen.len() != rho.systems().len() {
            return Err(Error::LabelMismatch("instrument inputs must cover every system of the state".into()));
        }
        Ok(Self {
            rho,
            m,
            n,
            spec,
            strong,
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn m(&self) -> &Instrument {
        &self.m
    }

    pub fn n(&self) -> &Instrument {
        &self.n
    }

    pub fn spec(&self) -> &ExtractorSpec {
        &self.spec
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    /// `rho^out` as a cq state on `T S` with register index `x * 2^n + y`.
    pub fn output_state(&self) -> Result<CqState> {
        self.m.apply(&self.rho)?.apply_instrument(&self.n, "XY")
    }

    /// `H_min(X|SB)` of `M[rho]`.
    pub fn k1(&self, gap: f64) -> Result<EntropyResult> {
        entropy::h_min(&Bipartite::from_cq(&self.m.apply(&self.rho)?), gap)
    }

    /// `H_min(Y|A)` of `N[rho]` in strong mode, `H_min(Y|TA)` otherwise.
    pub fn k2(&self, gap: f64) -> Result<EntropyResult> {
        let mut cq = self.n.apply(&self.rho)?;
        if self.strong {
            let names: Vec<&str> = self.n.output().iter().map(|s| s.name.as_str()).collect();
            cq = cq.partial_trace(&names)?;
        }
        entropy::h_min(&Bipartite::from_cq(&cq), gap)
    }
}

/// Output table `z[x * 2^n + y] = Ext(x, y)` as integers.
fn extractor_table(spec: &ExtractorSpec) -> Result<Vec<usize>> {
    let n = spec.n();
    let size = 1usize << n;
    let mut table = Vec::with_capacity(size * size);
    for x in 0..size {
        let xv = BitVector::from_u64(x as u64, n);
        for y in 0..size {
            let z = spec.extract(&xv, &BitVector::from_u64(y as u64, n))?;
            table.push(z.to_u64() as usize);
        }
    }
    Ok(table)
}

/// Distance from uniform of `Z = Ext(X, Y)` for an output state whose
/// register indexes `(x, y)` as `x * 2^n + y`. Strong mode keeps `Y`.
pub fn epsilon_of(out: &CqState, spec: &ExtractorSpec, strong: bool) -> Result<f64> {
    let size = 1usize << spec.n();
    if out.register().dim != size * size {
        return Err(Error::DimensionMismatch {
            expected: size * size,
            got: out.register().dim,
        });
    }
    let table = extractor_table(spec)?;
    let zdim = 1usize << spec.m();
    let w = 1.0 / zdim as f64;
    if strong {
        let zy = out.map_register("ZY", zdim * size, |xy| table[xy] * size + xy % size)?;
        let mut total = 0.0;
        for y in 0..size {
            let rho_y = (0..zdim).fold(zy.block(y).scale(0.0), |acc, z| acc + zy.block(z * size + y));
            for z in 0..zdim {
                total += trace_norm(&(zy.block(z * size + y) - rho_y.scale(w)))?;
            }
        }
        Ok(0.5 * total)
    } else {
        let z = out.map_register("Z", zdim, |xy| table[xy])?;
        let side = z.side_state().scale(w);
        let total = z
            .blocks()
            .iter()
            .map(|b| trace_norm(&(b - &side)))
            .sum::<Result<f64>>()?;
        Ok(0.5 * total)
    }
}

/// Exact `1/2 || rho_ZYST - omega_Z (x) rho_YST ||_1` (strong) or
/// `1/2 || rho_ZST - omega_Z (x) rho_ST ||_1` (weak).
pub fn measured_epsilon(inst: &ScenarioInstance) -> Result<f64> {
    epsilon_of(&inst.output_state()?, &inst.spec, inst.strong)
}

/// `1/2 sqrt(2^(n - k1 - k2))`.
pub fn ip_bound(n: usize, k1: f64, k2: f64) -> f64 {
    0.5 * (0.5 * (n as f64 - k1 - k2)).exp2()
}

/// `1/2 sqrt(2^(2m + n + r - k1 - k2))`.
pub fn deor_bound(n: usize, m: usize, r: usize, k1: f64, k2: f64) -> f64 {
    0.5 * (0.5 * ((2 * m + n + r) as f64 - k1 - k2)).exp2()
}

/// Measured distance against the formula bound for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub extractor: &'static str,
    pub seed: Option<u64>,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub strong: bool,
    pub measured: f64,
    pub k1: EntropyResult,
    pub k2: EntropyResult,
    /// Formula evaluated at the certified lower bounds of `k1`, `k2`.
    pub bound: f64,
    /// Fixed slack plus the bound's spread over the entropy brackets.
    pub slack: f64,
    /// `bound + slack - measured`.
    pub margin: f64,
    pub pass: bool,
}

fn report(inst: &ScenarioInstance, gap: f64, formula: impl Fn(f64, f64) -> f64) -> Result<BoundReport> {
    let measured = measured_epsilon(inst)?;
    let k1 = inst.k1(gap)?;
    let k2 = inst.k2(gap)?;
    let bound = formula(k1.value, k2.value);
    let spread = (bound - formula(k1.upper, k2.upper)).abs();
    let slack = BOUND_SLACK + spread;
    let margin = bound + slack - measured;
    let (m, r) = match inst.spec.family() {
        Some(f) => (f.m(), f.r()),
        None => (1, 0),
    };
    Ok(BoundReport {
        extractor: match inst.spec.kind() {
            ExtractorKind::Ip => "ip",
            ExtractorKind::Deor => "deor",
        },
        seed: None,
        n: inst.spec.n(),
        m,
        r,
        strong: inst.strong,
        measured,
        k1,
        k2,
        bound,
        slack,
        margin,
        pass: margin >= 0.0,
    })
}

/// Checks `eps <= 1/2 sqrt(2^(n - k1 - k2))` for an inner-product instance.
pub fn check_ip_bound(inst: &ScenarioInstance, gap: f64) -> Result<BoundReport> {
    if inst.spec.kind() != ExtractorKind::Ip {
        return Err(Error::InvalidParameter("check_ip_bound needs an inner-product extractor".into()));
    }
    let n = inst.spec.n();
    report(inst, gap, |k1, k2| ip_bound(n, k1, k2))
}

/// Checks `eps <= 1/2 sqrt(2^(2m + n + r - k1 - k2))` for a DEOR instance.
pub fn check_deor_bound(inst: &ScenarioInstance, gap: f64) -> Result<BoundReport> {
    let family = inst
        .spec
        .family()
        .ok_or_else(|| Error::InvalidParameter("check_deor_bound needs a DEOR extractor".into()))?;
    let (n, m, r) = (family.n(), family.m(), family.r());
    report(inst, gap, |k1, k2| deor_bound(n, m, r, k1, k2))
}

/// Dispatches on the extractor kind.
pub fn check_bound(inst: &ScenarioInstance, gap: f64) -> Result<BoundReport> {
    match inst.spec.kind() {
        ExtractorKind::Ip => check_ip_bound(inst, gap),
        ExtractorKind::Deor => check_deor_bound(inst, gap),
    }
}
