use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMat, CVec, Eigh};
use crate::{Error, Result};

/// Largest total dimension a dense operator may have.
pub const DIM_CAP: usize = 64;
/// Tolerance for the Hermitian, positivity and trace checks.
pub const STATE_TOL: f64 = 1e-10;

/// A named tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLabel {
    pub name: String,
    pub dim: usize,
    pub classical: bool,
}

impl SystemLabel {
    pub fn quantum(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            classical: false,
        }
    }

    pub fn classical(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            classical: true,
        }
    }
}

pub fn total_dim(systems: &[SystemLabel]) -> usize {
    systems.iter().map(|s| s.dim).product()
}

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    Ok(())
}

pub(crate) fn check_labels(systems: &[SystemLabel]) -> Result<()> {
    for (i, s) in systems.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::LabelMismatch(format!("system {:?} has dimension 0", s.name)));
        }
        if systems[..i].iter().any(|t| t.name == s.name) {
            return Err(Error::LabelMismatch(format!("duplicate system name {:?}", s.name)));
        }
    }
    Ok(())
}

pub(crate) fn position(systems: &[SystemLabel], name: &str) -> Result<usize> {
    systems
        .iter()
        .position(|s| s.name == name)
        .ok_or_else(|| Error::LabelMismatch(format!("no system named {name:?}")))
}

/// A sub-normalized state on labelled systems.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    systems: Vec<SystemLabel>,
    matrix: CMat,
}

impl DensityOperator {
    /// Validates shape, hermiticity, positivity, trace and the diagonal form
    /// of classical systems.
    pub fn new(systems: Vec<SystemLabel>, matrix: CMat) -> Result<Self> {
        check_labels(&systems)?;
        let dim = total_dim(&systems);
        check_cap(dim)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::NonHermitian(dev));
        }
        let matrix = linalg::hermitize(&matrix);
        let eig = Eigh::new(&matrix);
        if eig.min() < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                eig.min()
            )));
        }
        let tr = linalg::trace_re(&matrix);
        if tr <= 0.0 || tr > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        let state = Self { systems, matrix };
        state.check_classical(STATE_TOL)?;
        Ok(state)
    }

    pub(crate) fn from_parts(systems: Vec<SystemLabel>, matrix: CMat) -> Self {
        Self { systems, matrix }
    }

    /// `|psi><psi|` for a vector of norm at most one.
    pub fn pure(systems: Vec<SystemLabel>, psi: &CVec) -> Result<Self> {
        Self::new(systems, psi * psi.adjoint())
    }

    pub fn maximally_mixed(systems: Vec<SystemLabel>) -> Result<Self> {
        let d = total_dim(&systems);
        Self::new(systems, linalg::identity(d).scale(1.0 / d as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn classical(system: SystemLabel, probs: &[f64]) -> Result<Self> {
        let diag = CVec::from_iterator(probs.len(), probs.iter().map(|&p| c(p)));
        Self::new(vec![system], CMat::from_diagonal(&diag))
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    pub fn system(&self, name: &str) -> Result<&SystemLabel> {
        Ok(&self.systems[position(&self.systems, name)?])
    }

    /// `tr[rho^2] = tr[rho]^2` within `tol`.
    pub fn is_pure(&self, tol: f64) -> bool {
        let purity = (&self.matrix * &self.matrix).trace().re;
        (purity - self.trace().powi(2)).abs() <= tol
    }

    /// Traces out the named systems.
    pub fn partial_trace(&self, names: &[&str]) -> Result<Self> {
        let mut keep = vec![true; self.systems.len()];
        for name in names {
            keep[position(&self.systems, name)?] = false;
        }
        let matrix = linalg::partial_trace(&self.matrix, &self.dims(), &keep);
        let systems = self
            .systems
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        Ok(Self::from_parts(systems, matrix))
    }

    /// Keeps only the named systems, in the order given.
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        let drop: Vec<&str> = self
            .systems
            .iter()
            .map(|s| s.name.as_str())
            .filter(|n| !keep.contains(n))
            .collect();
        self.partial_trace(&drop)?.permute(keep)
    }

    /// Reorders systems to match `order`, which must name every system.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.systems.len() {
            return Err(Error::LabelMismatch(format!(
                "permutation names {} systems, state has {}",
                order.len(),
                self.systems.len()
            )));
        }
        let perm = order
            .iter()
            .map(|n| position(&self.systems, n))
            .collect::<Result<Vec<_>>>()?;
        let matrix = linalg::permute_systems(&self.matrix, &self.dims(), &perm);
        let systems = perm.iter().map(|&p| self.systems[p].clone()).collect();
        Ok(Self::from_parts(systems, matrix))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let systems: Vec<_> = self.systems.iter().chain(&other.systems).cloned().collect();
        check_labels(&systems)?;
        check_cap(total_dim(&systems))?;
        Ok(Self::from_parts(systems, linalg::kron(&self.matrix, &other.matrix)))
    }

    /// Canonical purification `(rho^1/2 (x) 1) |Omega><Omega| (rho^1/2 (x) 1)`,
    /// with an unnormalized `|Omega> = sum_i |i>|i>`. Each system `S` gains a
    /// quantum partner named `S'`, appended after the originals.
    pub fn purify(&self) -> Result<Self> {
        let d = self.dim();
        check_cap(d * d)?;
        let root = linalg::psd_power(&self.matrix, 0.5);
        let mut psi = CVec::zeros(d * d);
        for i in 0..d {
            for r in 0..d {
                psi[r * d + i] += root[(r, i)];
            }
        }
        let mut systems = self.systems.clone();
        systems.extend(
            self.systems
                .iter()
                .map(|s| SystemLabel::quantum(format!("{}'", s.name), s.dim)),
        );
        check_labels(&systems)?;
        Ok(Self::from_parts(systems, &psi * psi.adjoint()))
    }

    fn check_classical(&self, tol: f64) -> Result<()> {
        let dims = self.dims();
        for (k, s) in self.systems.iter().enumerate() {
            if !s.classical {
                continue;
            }
            let inner: usize = dims[k + 1..].iter().product();
            let digit = |i: usize| (i / inner) % s.dim;
            for i in 0..self.dim() {
                for j in 0..self.dim() {
                    if digit(i) != digit(j) && self.matrix[(i, j)].norm() > tol {
                        return Err(Error::InvalidState(format!(
                            "classical system {:?} has coherences",
                            s.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    a.tensor(b)
}

pub fn partial_trace(rho: &DensityOperator, names: &[&str]) -> Result<DensityOperator> {
    rho.partial_trace(names)
}

pub fn purify(rho: &DensityOperator) -> Result<DensityOperator> {
    rho.purify()
}
