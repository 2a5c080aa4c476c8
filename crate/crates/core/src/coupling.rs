//! Path-coupling certificates for single-site Glauber dynamics under a
//! weighted Hamming metric, and the bridge to the spectral gap.

use crate::error::{param, Error, Result};
use crate::exact::{spectral_report, TransitionMatrix};
use crate::gibbs::TABLE_CAP;
use crate::model::{Mask, TwoSpinSystem};
use crate::uniqueness::decay;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct WeightedHamming {
    pub weights: Vec<f64>,
}

impl WeightedHamming {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return param("metric weights must be positive and finite");
        }
        Ok(Self { weights })
    }

    pub fn unit(n: usize) -> Self {
        Self { weights: vec![1.0; n] }
    }

    /// `Φ_v = 1 − δ/8` for leaves, `Δ_v` for higher degrees, and 1 for
    /// isolated vertices.
    pub fn degree_weighted(system: &TwoSpinSystem, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return param("delta must lie in [0,1)");
        }
        let w = system
            .graph()
            .degrees()
            .into_iter()
            .map(|d| match d {
                0 => 1.0,
                1 => 1.0 - delta / 8.0,
                d => d as f64,
            })
            .collect();
        Ok(Self { weights: w })
    }

    pub fn distance(&self, x: Mask, y: Mask) -> f64 {
        let diff = x ^ y;
        (0..self.weights.len()).filter(|&v| diff >> v & 1 == 1).map(|v| self.weights[v]).sum()
    }
}

/// `p_u(+1, s) = λ_u β^{Δ_u−s} / (γ^s + λ_u β^{Δ_u−s})` with `s` the number
/// of `−1` neighbors.
pub fn p_plus(system: &TwoSpinSystem, u: usize, s: usize) -> f64 {
    let du = system.graph().degree(u);
    let wp = system.lambda(u) * system.beta().powi((du - s) as i32);
    wp / (system.gamma().powi(s as i32) + wp)
}

/// `R(v,u) = max_{0≤s<Δ_u} |p_u(+1,s+1) − p_u(+1,s)|` for each neighbor `u`
/// of `v`.
pub fn dobrushin_row(system: &TwoSpinSystem, v: usize) -> Result<Vec<(usize, f64)>> {
    if v >= system.n() {
        return param(format!("vertex {v} out of range"));
    }
    Ok(system.graph().neighbors(v).iter().map(|&u| (u, dobrushin_entry(system, u))).collect())
}

fn dobrushin_entry(system: &TwoSpinSystem, u: usize) -> f64 {
    let du = system.graph().degree(u);
    (0..du).map(|s| (p_plus(system, u, s + 1) - p_plus(system, u, s)).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexRow {
    pub vertex: usize,
    pub weight: f64,
    /// One-step expected distance from a pair differing only at `vertex`.
    pub expected: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingCertificate {
    /// Contraction rate over all adjacent pairs of `{−1,+1}^V`.
    pub r: f64,
    pub worst_vertex: usize,
    pub table: Vec<VertexRow>,
    /// Rate over adjacent pairs of feasible configurations only.
    pub r_feasible: Option<f64>,
    pub worst_feasible_pair: Option<(Mask, Mask)>,
    pub pass: bool,
}

/// Exact one-step expected distance under the optimal single-site coupling
/// of Glauber dynamics (uniform vertex choice over all `n` vertices).
pub fn path_coupling_certificate(system: &TwoSpinSystem, metric: &WeightedHamming) -> Result<CouplingCertificate> {
    let n = system.n();
    if metric.weights.len() != n {
        return Err(Error::Dimension { expected: n, got: metric.weights.len() });
    }
    if n == 1 {
        let row = VertexRow { vertex: 0, weight: metric.weights[0], expected: 0.0, rate: 1.0 };
        return Ok(CouplingCertificate {
            r: 1.0,
            worst_vertex: 0,
            table: vec![row],
            r_feasible: Some(1.0),
            worst_feasible_pair: None,
            pass: true,
        });
    }
    let nf = n as f64;
    let phi = &metric.weights;
    let entry: Vec<f64> = (0..n).map(|u| dobrushin_entry(system, u)).collect();
    let mut table = Vec::with_capacity(n);
    for v in 0..n {
        let spread: f64 = system.graph().neighbors(v).iter().map(|&u| phi[u] * entry[u]).sum();
        let expected = phi[v] * (1.0 - 1.0 / nf) + spread / nf;
        table.push(VertexRow { vertex: v, weight: phi[v], expected, rate: 1.0 - expected / phi[v] });
    }
    let worst = table.iter().min_by(|a, b| a.rate.total_cmp(&b.rate)).expect("n >= 1");
    let (r, worst_vertex) = (worst.rate, worst.vertex);
    let feasible = (n <= TABLE_CAP).then(|| feasible_rate(system, phi));
    Ok(CouplingCertificate {
        r,
        worst_vertex,
        table,
        r_feasible: feasible.map(|f| f.0),
        worst_feasible_pair: feasible.and_then(|f| f.1),
        pass: r > 0.0,
    })
}

/// Same bound restricted to adjacent pairs where both configurations have
/// positive weight, using the actual conditional probabilities.
fn feasible_rate(system: &TwoSpinSystem, phi: &[f64]) -> (f64, Option<(Mask, Mask)>) {
    let n = system.n();
    let nf = n as f64;
    let g = system.graph();
    let feasible = |m: Mask| system.log_weight(m) > f64::NEG_INFINITY;
    let plus_prob = |m: Mask, u: usize| {
        let minus = g.neighbors(u).iter().filter(|&&w| m >> w & 1 == 0).count();
        p_plus(system, u, minus)
    };
    let mut best = (f64::INFINITY, None);
    for x in 0..(1u32 << n) {
        if !feasible(x) {
            continue;
        }
        for v in 0..n {
            let y = x ^ (1 << v);
            if y < x || !feasible(y) {
                continue;
            }
            let spread: f64 = g.neighbors(v).iter().map(|&u| phi[u] * (plus_prob(x, u) - plus_prob(y, u)).abs()).sum();
            let rate = 1.0 - (phi[v] * (1.0 - 1.0 / nf) + spread / nf) / phi[v];
            if rate < best.0 {
                best = (rate, Some((x, y)));
            }
        }
    }
    if best.1.is_none() {
        best.0 = 1.0;
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BridgeCheck {
    pub r: f64,
    pub gap: f64,
    pub holds: bool,
}

/// `1 − λ₂(P) ≥ r` for a reversible `P`. Refuses failed certificates.
pub fn coupling_gap_bridge(cert: &CouplingCertificate, p: &TransitionMatrix) -> Result<BridgeCheck> {
    if !cert.pass {
        return Err(Error::Precondition("coupling certificate failed; no gap claim".into()));
    }
    let rep = spectral_report(p)?;
    Ok(BridgeCheck { r: cert.r, gap: rep.gap, holds: rep.gap >= cert.r - 1e-9 })
}

/// `f_{Δ_u}(λ_u (βγ)^s / γ^{Δ_u−1})`.
pub fn claim_isfd_factor(system: &TwoSpinSystem, u: usize, s: usize) -> Result<f64> {
    if u >= system.n() {
        return param(format!("vertex {u} out of range"));
    }
    let du = system.graph().degree(u);
    if du < 2 || s >= du {
        return param("need deg(u) >= 2 and 0 <= s <= deg(u)-1");
    }
    let (b, g) = (system.beta(), system.gamma());
    let x = system.lambda(u) * (b * g).powi(s as i32) / g.powi(du as i32 - 1);
    Ok(decay(b, g, du, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn leaf_row() {
        let sys = TwoSpinSystem::hardcore(Graph::path(2).unwrap(), 1.0).unwrap();
        let row = dobrushin_row(&sys, 0).unwrap();
        assert_eq!(row, vec![(1, 0.5)]);
    }

    #[test]
    fn free_ising_has_no_influence() {
        let sys = TwoSpinSystem::with_fields(Graph::cycle(4).unwrap(), 1.0, 1.0, vec![1.3; 4]).unwrap();
        assert!(dobrushin_row(&sys, 0).unwrap().iter().all(|&(_, r)| r.abs() < 1e-15));
    }

    #[test]
    fn isolated_vertex_rate() {
        let sys = TwoSpinSystem::hardcore(Graph::empty(3).unwrap(), 2.0).unwrap();
        let c = path_coupling_certificate(&sys, &WeightedHamming::unit(3)).unwrap();
        assert!((c.r - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rewrite_matches_row() {
        let sys = TwoSpinSystem::with_fields(Graph::star(3).unwrap(), 0.3, 1.4, vec![0.8, 1.1, 0.6, 2.0]).unwrap();
        for (u, r) in dobrushin_row(&sys, 1).unwrap() {
            let du = sys.graph().degree(u);
            let alt = (0..du).map(|s| claim_isfd_factor(&sys, u, s).unwrap()).fold(0.0, f64::max) / du as f64;
            assert!((r - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn failed_certificate_blocks_bridge() {
        let sys = TwoSpinSystem::hardcore(Graph::complete(4).unwrap(), 50.0).unwrap();
        let c = path_coupling_certificate(&sys, &WeightedHamming::unit(4)).unwrap();
        assert!(!c.pass);
        let table = crate::GibbsTable::enumerate(&sys).unwrap();
        let p = crate::exact::glauber_matrix(&table, crate::exact::GlauberPick::All).unwrap();
        assert!(coupling_gap_bridge(&c, &p).is_err());
    }
}
