use super::linalg::{self, c, CMat, Eigh};
use super::state::{check_cap, check_labels, position, total_dim, DensityOperator, SystemLabel, STATE_TOL};
use crate::{Error, Result};

/// Off-diagonal classical blocks above this size are rejected.
pub const CQ_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub label: String,
    pub kraus: Vec<CMat>,
}

/// A trace-non-increasing instrument from `input` systems to `output`
/// systems with a classical outcome register.
#[derive(Clone, Debug)]
pub struct Instrument {
    input: Vec<SystemLabel>,
    output: Vec<SystemLabel>,
    register: String,
    outcomes: Vec<Outcome>,
    trace_preserving: bool,
}

impl Instrument {
    pub fn new(
        input: Vec<SystemLabel>,
        output: Vec<SystemLabel>,
        register: impl Into<String>,
        outcomes: Vec<Outcome>,
    ) -> Result<Self> {
        check_labels(&input)?;
        check_labels(&output)?;
        if outcomes.is_empty() {
            return Err(Error::InvalidInstrument("no outcomes".into()));
        }
        let din = total_dim(&input);
        let dout = total_dim(&output);
        let mut sum = CMat::zeros(din, din);
        for o in &outcomes {
            for k in &o.kraus {
                if k.nrows() != dout || k.ncols() != din {
                    return Err(Error::InvalidInstrument(format!(
                        "Kraus operator for outcome {:?} is {}x{}, expected {dout}x{din}",
                        o.label,
                        k.nrows(),
                        k.ncols()
                    )));
                }
                sum += k.adjoint() * k;
            }
        }
        let eig = Eigh::new(&sum);
        if eig.max() > 1.0 + STATE_TOL {
            return Err(Error::InvalidInstrument(format!(
                "sum of K*K has eigenvalue {} > 1",
                eig.max()
            )));
        }
        let trace_preserving = eig.min() >= 1.0 - STATE_TOL;
        Ok(Self {
            input,
            output,
            register: register.into(),
            outcomes,
            trace_preserving,
        })
    }

    /// Destructive computational-basis measurement of `system`.
    pub fn measurement(system: SystemLabel, register: impl Into<String>) -> Self {
        let d = system.dim;
        let outcomes = (0..d)
            .map(|x| Outcome {
                label: x.to_string(),
                kraus: vec![CMat::from_fn(1, d, |_, j| c(if j == x { 1.0 } else { 0.0 }))],
            })
            .collect();
        Self {
            input: vec![system],
            output: Vec::new(),
            register: register.into(),
            outcomes,
            trace_preserving: true,
        }
    }

    pub fn input(&self) -> &[SystemLabel] {
        &self.input
    }

    pub fn output(&self) -> &[SystemLabel] {
        &self.output
    }

    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    fn outcome(&self, y: usize) -> Result<&Outcome> {
        self.outcomes.get(y).ok_or_else(|| {
            Error::InvalidParameter(format!("outcome {y} out of range ({} outcomes)", self.outcomes.len()))
        })
    }

    /// `sum_k K_k* T K_k`: the adjoint of outcome `y` applied to `T` on the
    /// output space.
    pub fn adjoint_apply(&self, y: usize, t: &CMat) -> Result<CMat> {
        let o = self.outcome(y)?;
        let dout = total_dim(&self.output);
        if t.nrows() != dout || t.ncols() != dout {
            return Err(Error::DimensionMismatch {
                expected: dout,
                got: t.nrows(),
            });
        }
        let din = total_dim(&self.input);
        Ok(o.kraus.iter().fold(CMat::zeros(din, din), |acc, k| acc + k.adjoint() * t * k))
    }

    /// `sum_k K_k S K_k*` for an operator on the input space.
    pub fn apply_outcome(&self, y: usize, s: &CMat) -> Result<CMat> {
        let o = self.outcome(y)?;
        let din = total_dim(&self.input);
        if s.nrows() != din || s.ncols() != din {
            return Err(Error::DimensionMismatch {
                expected: din,
                got: s.nrows(),
            });
        }
        let dout = total_dim(&self.output);
        Ok(o.kraus.iter().fold(CMat::zeros(dout, dout), |acc, k| acc + k * s * k.adjoint()))
    }

    /// Applies `N (x) id` to a matrix on `systems`, returning the per-outcome
    /// blocks on `output ++ rest` and the labels of that space.
    fn act(&self, systems: &[SystemLabel], m: &CMat) -> Result<(Vec<SystemLabel>, Vec<CMat>)> {
        let mut order = Vec::with_capacity(systems.len());
        for s in &self.input {
            let p = position(systems, &s.name)?;
            if systems[p].dim != s.dim {
                return Err(Error::LabelMismatch(format!(
                    "system {:?} has dimension {}, instrument expects {}",
                    s.name, systems[p].dim, s.dim
                )));
            }
            order.push(p);
        }
        let rest: Vec<usize> = (0..systems.len()).filter(|i| !order.contains(i)).collect();
        let perm: Vec<usize> = order.iter().chain(&rest).copied().collect();
        let dims: Vec<usize> = systems.iter().map(|s| s.dim).collect();
        let m = linalg::permute_systems(m, &dims, &perm);
        let dr: usize = rest.iter().map(|&i| dims[i]).product();
        let out_systems: Vec<SystemLabel> = self
            .output
            .iter()
            .cloned()
            .chain(rest.iter().map(|&i| systems[i].clone()))
            .collect();
        check_labels(&out_systems)?;
        check_cap(total_dim(&out_systems))?;
        let id = linalg::identity(dr);
        let blocks = self
            .outcomes
            .iter()
            .map(|o| {
                o.kraus.iter().fold(CMat::zeros(total_dim(&out_systems), total_dim(&out_systems)), |acc, k| {
                    let kk = linalg::kron(k, &id);
                    acc + &kk * &m * kk.adjoint()
                })
            })
            .collect();
        Ok((out_systems, blocks))
    }

    /// `(N (x) id)[rho]` as a cq state with this instrument's register.
    pub fn apply(&self, rho: &DensityOperator) -> Result<CqState> {
        let (systems, blocks) = self.act(rho.systems(), rho.matrix())?;
        Ok(CqState::from_parts(
            SystemLabel::classical(self.register.clone(), self.outcomes.len()),
            systems,
            blocks,
        ))
    }
}

pub fn apply_instrument(n: &Instrument, rho: &DensityOperator) -> Result<CqState> {
    n.apply(rho)
}

pub fn adjoint_apply(n: &Instrument, y: usize, t: &CMat) -> Result<CMat> {
    n.adjoint_apply(y, t)
}

/// `sum_x |x><x| (x) rho_x`, stored as the list of conditional blocks.
#[derive(Clone, Debug)]
pub struct CqState {
    register: SystemLabel,
    systems: Vec<SystemLabel>,
    blocks: Vec<CMat>,
}

impl CqState {
    pub fn new(register: SystemLabel, systems: Vec<SystemLabel>, blocks: Vec<CMat>) -> Result<Self> {
        if !register.classical {
            return Err(Error::InvalidState("register must be classical".into()));
        }
        if blocks.len() != register.dim {
            return Err(Error::DimensionMismatch {
                expected: register.dim,
                got: blocks.len(),
            });
        }
        let all: Vec<SystemLabel> = std::iter::once(register.clone()).chain(systems.iter().cloned()).collect();
        check_labels(&all)?;
        let d = total_dim(&systems);
        check_cap(d)?;
        let mut tr = 0.0;
        for b in &blocks {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.nrows(),
                });
            }
            let dev = linalg::hermitian_deviation(b);
            if dev > STATE_TOL {
                return Err(Error::NonHermitian(dev));
            }
            let eig = Eigh::new(b);
            if eig.min() < -STATE_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {:e} in block", eig.min())));
            }
            tr += linalg::trace_re(b);
        }
        if tr <= 0.0 || tr > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        let blocks = blocks.iter().map(linalg::hermitize).collect();
        Ok(Self::from_parts(register, systems, blocks))
    }

    pub(crate) fn from_parts(register: SystemLabel, systems: Vec<SystemLabel>, blocks: Vec<CMat>) -> Self {
        Self {
            register,
            systems,
            blocks,
        }
    }

    /// Classical distribution with no side information.
    pub fn from_distribution(register: SystemLabel, probs: &[f64]) -> Result<Self> {
        let blocks = probs.iter().map(|&p| CMat::from_element(1, 1, c(p))).collect();
        Self::new(register, Vec::new(), blocks)
    }

    /// Splits a dense state whose first system is classical.
    pub fn from_density(rho: &DensityOperator) -> Result<Self> {
        let (register, systems) = rho
            .systems()
            .split_first()
            .ok_or_else(|| Error::InvalidState("state has no systems".into()))?;
        if !register.classical {
            return Err(Error::InvalidState(format!("first system {:?} is not classical", register.name)));
        }
        let d = total_dim(systems);
        let m = rho.matrix();
        for x in 0..register.dim {
            for x2 in 0..register.dim {
                if x != x2 && linalg::max_abs(&linalg::block(m, d, x, x2)) > CQ_TOL {
                    return Err(Error::InvalidState("classical register has coherences".into()));
                }
            }
        }
        let blocks = (0..register.dim).map(|x| linalg::block(m, d, x, x)).collect();
        Ok(Self::from_parts(register.clone(), systems.to_vec(), blocks))
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        let d = self.side_dim();
        let dx = self.blocks.len();
        check_cap(d * dx)?;
        let mut m = CMat::zeros(d * dx, d * dx);
        for (x, b) in self.blocks.iter().enumerate() {
            m.view_mut((x * d, x * d), (d, d)).copy_from(b);
        }
        let systems = std::iter::once(self.register.clone()).chain(self.systems.iter().cloned()).collect();
        Ok(DensityOperator::from_parts(systems, m))
    }

    pub fn register(&self) -> &SystemLabel {
        &self.register
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn side_dim(&self) -> usize {
        total_dim(&self.systems)
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// `rho_{B & X = x}`.
    pub fn block(&self, x: usize) -> &CMat {
        &self.blocks[x]
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(linalg::trace_re).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(linalg::trace_re).collect()
    }

    /// `rho_B = sum_x rho_x`.
    pub fn side_state(&self) -> CMat {
        let d = self.side_dim();
        self.blocks.iter().fold(CMat::zeros(d, d), |acc, b| acc + b)
    }

    pub fn partial_trace(&self, names: &[&str]) -> Result<Self> {
        let mut keep = vec![true; self.systems.len()];
        for name in names {
            keep[position(&self.systems, name)?] = false;
        }
        let dims: Vec<usize> = self.systems.iter().map(|s| s.dim).collect();
        let blocks = self.blocks.iter().map(|b| linalg::partial_trace(b, &dims, &keep)).collect();
        let systems = self
            .systems
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        Ok(Self::from_parts(self.register.clone(), systems, blocks))
    }

    /// Applies a classical function to the register: `Z = f(X)` with
    /// `f(x) < dim`, merging blocks.
    pub fn map_register(&self, name: impl Into<String>, dim: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        let d = self.side_dim();
        let mut blocks = vec![CMat::zeros(d, d); dim];
        for (x, b) in self.blocks.iter().enumerate() {
            let z = f(x);
            if z >= dim {
                return Err(Error::InvalidParameter(format!("register map sends {x} to {z} >= {dim}")));
            }
            blocks[z] += b;
        }
        Ok(Self::from_parts(SystemLabel::classical(name, dim), self.systems.clone(), blocks))
    }

    /// Applies `N (x) id` to each block. The new register indexes pairs
    /// `(x, y)` as `x * |Y| + y`.
    pub fn apply_instrument(&self, n: &Instrument, register: impl Into<String>) -> Result<Self> {
        let mut blocks = Vec::with_capacity(self.blocks.len() * n.num_outcomes());
        let mut systems = None;
        for b in &self.blocks {
            let (sys, out) = n.act(&self.systems, b)?;
            systems = Some(sys);
            blocks.extend(out);
        }
        let systems = systems.unwrap_or_default();
        Ok(Self::from_parts(
            SystemLabel::classical(register, self.blocks.len() * n.num_outcomes()),
            systems,
            blocks,
        ))
    }

    /// Moves a classical side system into the register: `(x, s)` becomes
    /// `x * |S| + s`.
    pub fn absorb_classical(&self, name: &str, register: impl Into<String>) -> Result<Self> {
        let p = position(&self.systems, name)?;
        let ds = self.systems[p].dim;
        let mut order: Vec<usize> = vec![p];
        order.extend((0..self.systems.len()).filter(|&i| i != p));
        let dims: Vec<usize> = self.systems.iter().map(|s| s.dim).collect();
        let rest: Vec<SystemLabel> = order[1..].iter().map(|&i| self.systems[i].clone()).collect();
        let dr = total_dim(&rest);
        let mut blocks = Vec::with_capacity(self.blocks.len() * ds);
        for b in &self.blocks {
            let m = linalg::permute_systems(b, &dims, &order);
            for s in 0..ds {
                blocks.push(linalg::block(&m, dr, s, s));
            }
        }
        Ok(Self::from_parts(
            SystemLabel::classical(register, self.blocks.len() * ds),
            rest,
            blocks,
        ))
    }
}
