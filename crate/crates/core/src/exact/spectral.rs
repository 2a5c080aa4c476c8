use super::transition::TransitionMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

/// Residual tolerated before a matrix is treated as non-reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub abs_gap: f64,
    pub db_residual: f64,
}

impl SpectralReport {
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn lambda_star(&self) -> f64 {
        1.0 - self.abs_gap
    }
}

/// `max |μ(σ)P(σ,τ) − μ(τ)P(τ,σ)|`.
pub fn detailed_balance_residual(p: &TransitionMatrix) -> f64 {
    let mu = p.table.probs();
    let m = p.dim();
    let mut r: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            r = r.max((mu[i] * p.p[(i, j)] - mu[j] * p.p[(j, i)]).abs());
        }
    }
    r
}

/// `D^{1/2} P D^{−1/2}`, symmetrized to remove rounding asymmetry.
pub fn symmetrized(p: &TransitionMatrix) -> DMatrix<f64> {
    let sq: Vec<f64> = p.table.probs().iter().map(|x| x.sqrt()).collect();
    let m = p.dim();
    let s = DMatrix::from_fn(m, m, |i, j| sq[i] * p.p[(i, j)] / sq[j]);
    (&s + s.transpose()) * 0.5
}

/// Spectrum of a reversible chain.
pub fn spectral_report(p: &TransitionMatrix) -> Result<SpectralReport> {
    let db = detailed_balance_residual(p);
    if db > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(db));
    }
    let m = p.dim();
    if m == 1 {
        return Ok(SpectralReport { eigenvalues: vec![1.0], gap: 1.0, abs_gap: 1.0, db_residual: db });
    }
    let eig = SymmetricEigen::new(symmetrized(p));
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let gap = 1.0 - ev[1];
    let star = ev[1..].iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(SpectralReport { eigenvalues: ev, gap, abs_gap: 1.0 - star, db_residual: db })
}
