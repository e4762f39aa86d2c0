//! Dense complex helpers shared by the state, entropy and verification code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues at or below this fraction of the largest one are treated as
/// zero by support-restricted functions.
pub const SUPPORT_RTOL: f64 = 1e-12;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry of `|m - m*|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Hermitian eigendecomposition, ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn new(m: &CMat) -> Self {
        let eig = hermitize(m).symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
        Self { values, vectors }
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = self.vectors.nrows();
        let mut out = CMat::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w != 0.0 {
                let v = self.vectors.column(k);
                out += (v * v.adjoint()).scale(w);
            }
        }
        out
    }

    /// Threshold separating the support from the kernel.
    pub fn support_cutoff(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        SUPPORT_RTOL * scale
    }

    /// Orthonormal basis of the support as columns.
    pub fn support_basis(&self) -> CMat {
        let cut = self.support_cutoff();
        let cols: Vec<usize> = (0..self.values.len()).filter(|&k| self.values[k] > cut).collect();
        CMat::from_fn(self.vectors.nrows(), cols.len(), |r, k| self.vectors[(r, cols[k])])
    }
}

pub fn lambda_max(m: &CMat) -> f64 {
    Eigh::new(m).max()
}

/// `m^p` for PSD `m`, taken on the support only.
pub fn psd_power(m: &CMat, p: f64) -> CMat {
    let eig = Eigh::new(m);
    let cut = eig.support_cutoff();
    eig.map(|lam| if lam > cut { lam.powf(p) } else { 0.0 })
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `1_a (x) m`.
pub fn lift_right(a: usize, m: &CMat) -> CMat {
    kron(&identity(a), m)
}

/// Splits a flat index into per-system digits, first system most significant.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn compose(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (digit, dim)| acc * dim + digit)
}

/// Traces out every system whose `keep` flag is false.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[bool]) -> CMat {
    let total: usize = dims.iter().product();
    debug_assert_eq!(m.nrows(), total);
    let kept: usize = dims.iter().zip(keep).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let traced = total / kept;
    // (kept index, traced index) for every flat index
    let mut split = Vec::with_capacity(total);
    let mut dig = vec![0; dims.len()];
    for f in 0..total {
        digits(f, dims, &mut dig);
        let k = compose(dig.iter().zip(dims).zip(keep).filter(|(_, &k)| k).map(|((&g, &d), _)| (g, d)));
        let t = compose(dig.iter().zip(dims).zip(keep).filter(|(_, &k)| !k).map(|((&g, &d), _)| (g, d)));
        split.push((k, t));
    }
    let mut by_traced = vec![Vec::new(); traced];
    for (f, &(k, t)) in split.iter().enumerate() {
        by_traced[t].push((f, k));
    }
    let mut out = CMat::zeros(kept, kept);
    for group in &by_traced {
        for &(f, kf) in group {
            for &(g, kg) in group {
                out[(kf, kg)] += m[(f, g)];
            }
        }
    }
    out
}

/// Reorders tensor factors: new system `i` is old system `perm[i]`.
pub fn permute_systems(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0; total];
    let mut dig = vec![0; dims.len()];
    for (f, slot) in map.iter_mut().enumerate() {
        digits(f, dims, &mut dig);
        *slot = compose(perm.iter().map(|&p| dig[p]).zip(new_dims.iter().copied()));
    }
    let mut out = CMat::zeros(total, total);
    for f in 0..total {
        for g in 0..total {
            out[(map[f], map[g])] = m[(f, g)];
        }
    }
    out
}

/// Sub-block `(i, j)` of a matrix on `A (x) B` with `dim B = db`.
pub fn block(m: &CMat, db: usize, i: usize, j: usize) -> CMat {
    m.view((i * db, j * db), (db, db)).into_owned()
}

/// Entrywise transpose (no conjugation).
pub fn transpose(m: &CMat) -> CMat {
    m.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    #[test]
    fn partial_trace_of_product() {
        let a = diag(&[0.25, 0.75]);
        let b = diag(&[0.1, 0.2, 0.7]);
        let ab = kron(&a, &b);
        let ta = partial_trace(&ab, &[2, 3], &[true, false]);
        let tb = partial_trace(&ab, &[2, 3], &[false, true]);
        assert_abs_diff_eq!((ta - a).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((tb - b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn permute_swaps_kron_order() {
        let a = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(3, 3, |i, j| C64::new(j as f64 - i as f64, 0.5));
        let swapped = permute_systems(&kron(&a, &b), &[2, 3], &[1, 0]);
        assert_abs_diff_eq!((swapped - kron(&b, &a)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn power_acts_on_support() {
        let m = diag(&[4.0, 0.0, 1e-20]);
        let p = psd_power(&m, -0.5);
        assert_abs_diff_eq!((p - diag(&[0.5, 0.0, 0.0])).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(Eigh::new(&m).support_basis().ncols(), 1);
    }
}
