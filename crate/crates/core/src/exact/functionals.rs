//! Variances, Dirichlet forms, worst-case pinning gaps, tensorization and
//! mixing-time bounds.

use super::spectral::spectral_report;
use super::transition::{glauber_matrix, transition_matrix, GlauberPick, TransitionMatrix};
use crate::dynamics::DynamicsKind;
use crate::error::{param, Error, Result};
use crate::gibbs::GibbsTable;
use crate::model::{all_pinnings, subsets_of, Mask, Pinning};
use nalgebra::DMatrix;
use serde::Serialize;

/// Largest `n` for sweeps over all `3^n` pinnings.
pub const PINNING_CAP: usize = 8;

pub fn variance(table: &GibbsTable, f: &[f64]) -> Result<f64> {
    if f.len() != table.len() {
        return Err(Error::Dimension { expected: table.len(), got: f.len() });
    }
    let mu = table.probs();
    let mean: f64 = mu.iter().zip(f).map(|(p, x)| p * x).sum();
    Ok(mu.iter().zip(f).map(|(p, x)| p * (x - mean).powi(2)).sum())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Functionals {
    pub variance: f64,
    /// `⟨f, (I − P) f⟩_μ`.
    pub dirichlet: f64,
    /// `½ Σ μ(σ) P(σ,τ) (f(σ) − f(τ))²`.
    pub dirichlet_pairs: f64,
}

pub fn chain_functionals(p: &TransitionMatrix, f: &[f64]) -> Result<Functionals> {
    let m = p.dim();
    if f.len() != m {
        return Err(Error::Dimension { expected: m, got: f.len() });
    }
    let mu = p.table.probs();
    let mut bil = 0.0;
    let mut pairs = 0.0;
    for i in 0..m {
        let pf: f64 = (0..m).map(|j| p.p[(i, j)] * f[j]).sum();
        bil += mu[i] * f[i] * (f[i] - pf);
        for j in 0..m {
            pairs += mu[i] * p.p[(i, j)] * (f[i] - f[j]).powi(2);
        }
    }
    Ok(Functionals { variance: variance(&p.table, f)?, dirichlet: bil, dirichlet_pairs: pairs / 2.0 })
}

pub fn glauber_gap(table: &GibbsTable, pick: GlauberPick) -> Result<f64> {
    if table.len() == 1 {
        return Ok(1.0);
    }
    Ok(spectral_report(&glauber_matrix(table, pick)?)?.gap)
}

#[derive(Debug, Clone, Serialize)]
pub struct MinGap {
    pub value: f64,
    pub witness: Pinning,
    pub pinnings_checked: usize,
}

/// Minimum Glauber gap over all feasible pinnings of the table's free
/// vertices. Pinnings leaving a single state count as gap 1.
pub fn min_gap(table: &GibbsTable, pick: GlauberPick) -> Result<MinGap> {
    let free = table.free_mask();
    if free.count_ones() as usize > PINNING_CAP {
        return Err(Error::Cap(format!("pinning sweeps need at most {PINNING_CAP} free vertices")));
    }
    let mut best = MinGap { value: 1.0, witness: table.pinning(), pinnings_checked: 0 };
    for (dom, plus) in all_pinnings(free) {
        let Ok(cond) = table.condition_masks(dom, plus) else { continue };
        best.pinnings_checked += 1;
        let g = glauber_gap(&cond, pick)?;
        if g < best.value {
            best.value = g;
            best.witness = cond.pinning();
        }
    }
    Ok(best)
}

/// `μ[Var_v f]` summed over free vertices `v`.
pub fn local_variance_sum(table: &GibbsTable, f: &[f64]) -> Result<f64> {
    if f.len() != table.len() {
        return Err(Error::Dimension { expected: table.len(), got: f.len() });
    }
    let mu = table.probs();
    let mut total = 0.0;
    for (i, &s) in table.states().iter().enumerate() {
        for v in table.free_vertices() {
            if let Some(j) = table.index_of(s ^ (1 << v)) {
                let q = mu[i] / (mu[i] + mu[j]);
                total += mu[i] * q * (1.0 - q) * (f[i] - f[j]).powi(2);
            }
        }
    }
    Ok(total)
}

/// `C = 1 / (n · gap)` with `n` the number of free vertices.
pub fn tensorization_constant(table: &GibbsTable) -> Result<f64> {
    if table.len() < 2 {
        return Err(Error::Precondition("tensorization needs |Ω| >= 2".into()));
    }
    let n = table.free_vertices().len() as f64;
    Ok(1.0 / (n * glauber_gap(table, GlauberPick::Free)?))
}

/// Returns `(Var_μ[f], C · Σ_v μ[Var_v f])`.
pub fn tensorization_sides(table: &GibbsTable, c: f64, f: &[f64]) -> Result<(f64, f64)> {
    Ok((variance(table, f)?, c * local_variance_sum(table, f)?))
}

/// `T_mix(ε) ≤ 1/(1−λ*) · log(1/(ε μ_min))`, floored at zero.
pub fn mixing_time_bound(gap_abs: f64, mu_min: f64, eps: f64) -> Result<f64> {
    if !(gap_abs > 0.0 && gap_abs <= 1.0 + 1e-12) {
        return param("absolute gap must lie in (0,1]");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return param("eps must lie in (0,1)");
    }
    if !(mu_min > 0.0 && mu_min <= 1.0) {
        return param("mu_min must lie in (0,1]");
    }
    Ok(((1.0 / (eps * mu_min)).ln() / gap_abs).max(0.0))
}

/// Smallest positive conditional marginal over all pinnings and free
/// vertices (the `b` with `μ_min ≥ b^n`).
pub fn marginal_floor(table: &GibbsTable) -> Result<f64> {
    let free = table.free_mask();
    if free.count_ones() as usize > PINNING_CAP {
        return Err(Error::Cap(format!("pinning sweeps need at most {PINNING_CAP} free vertices")));
    }
    let mut b: f64 = 1.0;
    for (dom, plus) in all_pinnings(free) {
        let Ok(cond) = table.condition_masks(dom, plus) else { continue };
        for v in cond.free_vertices() {
            let p = cond.marginal_plus(v);
            for q in [p, 1.0 - p] {
                if q > 1e-300 {
                    b = b.min(q);
                }
            }
        }
    }
    Ok(b)
}

/// Closed-form upper bound on `1/b` for uniform activity λ and maximum
/// degree Δ: `(λ + 1/λ)(γ + 1/γ + 2)^Δ` when β = 0, `(λ + 1/λ)(1/β + 2)^Δ`
/// otherwise. Only valid when every vertex has a neighbor: an isolated
/// vertex has `1/b = 1 + max(λ, 1/λ)`, which exceeds `λ + 1/λ` for λ ≠ 1.
pub fn marginal_floor_closed_form(beta: f64, gamma: f64, lambda: f64, max_degree: usize) -> f64 {
    let alpha = if beta == 0.0 { gamma + 1.0 / gamma + 2.0 } else { 1.0 / beta + 2.0 };
    1.0 / ((lambda + 1.0 / lambda) * alpha.powi(max_degree as i32))
}

/// Worst-start total variation `max_x ‖P^t(x,·) − μ‖` for `t = 0..=tmax`.
pub fn worst_tv_curve(p: &TransitionMatrix, tmax: usize) -> Vec<f64> {
    let mu = p.table.probs();
    let m = p.dim();
    let mut pt = DMatrix::<f64>::identity(m, m);
    let mut out = Vec::with_capacity(tmax + 1);
    for t in 0..=tmax {
        if t > 0 {
            pt = &pt * &p.p;
        }
        let worst = (0..m)
            .map(|i| (0..m).map(|j| (pt[(i, j)] - mu[j]).abs()).sum::<f64>() / 2.0)
            .fold(0.0, f64::max);
        out.push(worst);
    }
    out
}

/// First `t ≤ tmax` with worst-start TV at most `eps`.
pub fn exact_mixing_time(p: &TransitionMatrix, eps: f64, tmax: usize) -> Option<usize> {
    worst_tv_curve(p, tmax).iter().position(|&d| d <= eps)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Compares the Dirichlet form of the field dynamics with
///
/// ```text
/// (Z_π / θ^{|V|}) · Σ_R (1−θ)^{|R|} θ^{|V|−|R|} · π_R(1_R) · Var_{π^{1_R}}[f]
/// ```
///
/// where `π = μ^{(θ)}`, `Z_π = Σ_σ μ(σ) θ^{‖σ‖₊}`, and a term is zero when
/// `π_R(1_R) = 0`.
pub fn field_dirichlet_identity_check(table: &GibbsTable, theta: f64, f: &[f64]) -> Result<IdentityCheck> {
    if table.pinned_mask() != 0 {
        return param("identity check is defined for unpinned tables");
    }
    if f.len() != table.len() {
        return Err(Error::Dimension { expected: table.len(), got: f.len() });
    }
    let p = transition_matrix(&DynamicsKind::Field { theta }, table)?;
    let lhs = chain_functionals(&p, f)?.dirichlet;
    let n = table.n();
    let mu = table.probs();
    let z_pi: f64 = table.states().iter().zip(mu).map(|(&s, &q)| q * theta.powi(s.count_ones() as i32)).sum();
    let pi = table.reweight(&vec![theta; n])?;
    let pw = pi.probs();
    let mut sum = 0.0;
    for r in subsets_of(table.full_mask()) {
        let rc = r.count_ones() as i32;
        let prob_r = (1.0 - theta).powi(rc) * theta.powi(n as i32 - rc);
        let members: Vec<usize> = (0..table.len()).filter(|&j| table.states()[j] & r == r).collect();
        let mass: f64 = members.iter().map(|&j| pw[j]).sum();
        if mass == 0.0 {
            continue;
        }
        let mean: f64 = members.iter().map(|&j| pw[j] * f[j]).sum::<f64>() / mass;
        let var: f64 = members.iter().map(|&j| pw[j] * (f[j] - mean).powi(2)).sum::<f64>() / mass;
        sum += prob_r * mass * var;
    }
    let rhs = z_pi / theta.powi(n as i32) * sum;
    Ok(IdentityCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Pinnings as mask pairs for callers that sweep externally.
pub fn feasible_pinnings(table: &GibbsTable) -> Vec<(Mask, Mask)> {
    all_pinnings(table.free_mask()).into_iter().filter(|&(d, p)| table.is_feasible_masks(d, p)).collect()
}
