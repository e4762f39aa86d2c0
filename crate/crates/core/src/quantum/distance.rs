use super::linalg::{self, CMat, Eigh};
use super::state::{DensityOperator, STATE_TOL};
use crate::{Error, Result};

fn check_hermitian(s: &CMat) -> Result<()> {
    let dev = linalg::hermitian_deviation(s);
    if dev > STATE_TOL * linalg::max_abs(s).max(1.0) {
        return Err(Error::NonHermitian(dev));
    }
    Ok(())
}

/// `||S||_1` for Hermitian `S`.
pub fn trace_norm(s: &CMat) -> Result<f64> {
    check_hermitian(s)?;
    Ok(Eigh::new(s).values.iter().map(|v| v.abs()).sum())
}

/// `||S||_+ = max(tr S+, tr S-)`, attained by a spectral projector.
pub fn trace_norm_plus(s: &CMat) -> Result<f64> {
    check_hermitian(s)?;
    let eig = Eigh::new(s);
    let pos: f64 = eig.values.iter().filter(|&&v| v > 0.0).sum();
    let neg: f64 = -eig.values.iter().filter(|&&v| v < 0.0).sum::<f64>();
    Ok(pos.max(neg))
}

/// Spectral parts `(S+, S-)` with `S = S+ - S-` and `S+ S- = 0`.
pub fn hermitian_split(s: &CMat) -> Result<(CMat, CMat)> {
    check_hermitian(s)?;
    let eig = Eigh::new(s);
    Ok((eig.map(|v| v.max(0.0)), eig.map(|v| (-v).max(0.0))))
}

/// Sum of singular values.
pub fn schatten_one(m: &CMat) -> f64 {
    m.singular_values().iter().sum()
}

/// `||sqrt(rho) sqrt(sigma)||_1 + sqrt((1 - tr rho)(1 - tr sigma))`.
pub fn generalized_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.systems() != sigma.systems() {
        return Err(Error::LabelMismatch("states live on different systems".into()));
    }
    let a = linalg::psd_power(rho.matrix(), 0.5);
    let b = linalg::psd_power(sigma.matrix(), 0.5);
    let defect = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    Ok(schatten_one(&(a * b)) + defect)
}

/// `sqrt(1 - F*^2)`, clamped to `[0, 1]`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = generalized_fidelity(rho, sigma)?.clamp(0.0, 1.0);
    Ok((1.0 - f * f).max(0.0).sqrt().clamp(0.0, 1.0))
}
