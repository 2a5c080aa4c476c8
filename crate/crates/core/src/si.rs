//! Influence matrices and spectral independence.
//!
//! For a pinning `σ_Λ` and free vertices `u ≠ v`,
//!
//! ```text
//! I(u,v) = μ^{σ_Λ, u←+}_v(+1) − μ^{σ_Λ, u←−}_v(+1)
//! Ψ(u,v) = |I(u,v)|
//! ```
//!
//! when both spins at `u` are feasible, and 0 otherwise. On Boolean
//! domains the total variation in the definition of Ψ reduces to this
//! absolute difference.

use crate::error::{Error, Result};
use crate::gibbs::GibbsTable;
use crate::model::{all_pinnings, DirectionVector, Mask, Pinning, TwoSpinSystem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest number of free vertices for an all-pinnings sweep.
pub const SI_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Absolute,
    Signed,
}

#[derive(Debug, Clone)]
pub struct InfluenceMatrix {
    /// Row/column vertex labels (`V ∖ Λ`).
    pub index: Vec<usize>,
    pub entries: DMatrix<f64>,
    pub flavor: Flavor,
}

impl InfluenceMatrix {
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let i = self.index.iter().position(|&x| x == u)?;
        let j = self.index.iter().position(|&x| x == v)?;
        Some(self.entries[(i, j)])
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.entries)
    }
}

/// Both flavors at once from one pass over the conditioned support.
fn influence_pair(table: &GibbsTable, dom: Mask, plus: Mask) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let plus = plus & dom;
    let free = table.free_mask() & !dom;
    let index: Vec<usize> = (0..table.n()).filter(|&v| free >> v & 1 == 1).collect();
    let m = index.len();
    let mut tot = vec![[0.0f64; 2]; m];
    let mut mass = vec![[0.0f64; 2]; m * m];
    let mut any = false;
    for (&s, &p) in table.states().iter().zip(table.probs()) {
        if s & dom != plus {
            continue;
        }
        any = true;
        for (i, &u) in index.iter().enumerate() {
            let c = (s >> u & 1) as usize;
            tot[i][c] += p;
            for (j, &v) in index.iter().enumerate() {
                if s >> v & 1 == 1 {
                    mass[i * m + j][c] += p;
                }
            }
        }
    }
    if !any {
        return Err(Error::Infeasible);
    }
    let signed = DMatrix::from_fn(m, m, |i, j| {
        if i == j || tot[i][0] == 0.0 || tot[i][1] == 0.0 {
            0.0
        } else {
            mass[i * m + j][1] / tot[i][1] - mass[i * m + j][0] / tot[i][0]
        }
    });
    Ok((index, signed))
}

pub fn influence_matrix(table: &GibbsTable, pin: &Pinning, flavor: Flavor) -> Result<InfluenceMatrix> {
    let (dom, plus) = pin.masks(table.n())?;
    influence_matrix_masks(table, dom, plus, flavor)
}

pub fn influence_matrix_masks(table: &GibbsTable, dom: Mask, plus: Mask, flavor: Flavor) -> Result<InfluenceMatrix> {
    let (index, signed) = influence_pair(table, dom, plus)?;
    let entries = match flavor {
        Flavor::Signed => signed,
        Flavor::Absolute => signed.abs(),
    };
    Ok(InfluenceMatrix { index, entries, flavor })
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    // Unbounded Schur iteration can stall on some defective matrices.
    match nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => gelfand_radius(m),
    }
}

/// `lim ‖M^k‖^{1/k}` by repeated squaring with rescaling.
fn gelfand_radius(m: &DMatrix<f64>) -> f64 {
    let mut a = m.clone();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..60 {
        let norm = a.norm();
        if norm == 0.0 {
            return 0.0;
        }
        a /= norm;
        log_scale += norm.ln() / k;
        a = &a * &a;
        k *= 2.0;
    }
    (log_scale + a.norm().ln() / k).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct PinningSweep {
    /// Max of ρ(Ψ) over feasible pinnings.
    pub eta: f64,
    pub witness: Pinning,
    /// Max of ρ over the signed matrices.
    pub eta_signed: f64,
    /// Pinnings where the absolute and signed radii differ by more than 1e−9.
    pub flavor_disagreements: usize,
    pub pinnings: usize,
}

/// ρ(Ψ) for every feasible pinning of the table's free vertices, with
/// the pinning's index in [`all_pinnings`] order.
pub fn rho_per_pinning(table: &GibbsTable) -> Result<Vec<(usize, Mask, Mask, f64, f64)>> {
    let free = table.free_mask();
    if free.count_ones() as usize > SI_CAP {
        return Err(Error::Cap(format!("pinning sweeps support at most {SI_CAP} free vertices")));
    }
    let mut out = Vec::new();
    for (id, (dom, plus)) in all_pinnings(free).into_iter().enumerate() {
        let Ok((_, signed)) = influence_pair(table, dom, plus) else { continue };
        let abs = spectral_radius(&signed.abs());
        let sgn = spectral_radius(&signed);
        out.push((id, dom, plus, abs, sgn));
    }
    Ok(out)
}

pub fn max_rho_over_pinnings(table: &GibbsTable) -> Result<PinningSweep> {
    Ok(fold_sweep(&rho_per_pinning(table)?, table.n()))
}

fn fold_sweep(rows: &[(usize, Mask, Mask, f64, f64)], n: usize) -> PinningSweep {
    let mut sweep = PinningSweep {
        eta: 0.0,
        witness: Pinning::empty(),
        eta_signed: 0.0,
        flavor_disagreements: 0,
        pinnings: rows.len(),
    };
    for &(_, dom, plus, abs, sgn) in rows {
        if abs > sweep.eta {
            sweep.eta = abs;
            sweep.witness = Pinning::from_masks(dom, plus, n);
        }
        sweep.eta_signed = sweep.eta_signed.max(sgn);
        if (abs - sgn).abs() > 1e-9 {
            sweep.flavor_disagreements += 1;
        }
    }
    sweep
}

/// Field grid for complete spectral independence.
#[derive(Debug, Clone, Serialize)]
pub struct SiGrid {
    pub scalars: Vec<f64>,
    pub random_vectors: usize,
    pub seed: u64,
    /// Additional explicit field vectors.
    pub extra: Vec<Vec<f64>>,
}

impl Default for SiGrid {
    fn default() -> Self {
        Self { scalars: (1..=20).map(|i| i as f64 * 0.05).collect(), random_vectors: 50, seed: 0, extra: Vec::new() }
    }
}

impl SiGrid {
    pub fn points(&self, n: usize) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = self.scalars.iter().map(|&t| vec![t; n]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_vectors {
            // (0,1]: 1 − U with U uniform on [0,1).
            pts.push((0..n).map(|_| 1.0 - rng.gen::<f64>()).collect());
        }
        pts.extend(self.extra.iter().cloned());
        pts
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub id: usize,
    pub field: Vec<f64>,
    pub eta: f64,
    pub witness: Pinning,
}

#[derive(Debug, Clone, Serialize)]
pub struct SiEstimate {
    /// Lower bound on the complete-SI constant: max over the grid.
    pub eta_hat: f64,
    pub argmax: usize,
    pub eta_signed: f64,
    pub flavor_disagreements: usize,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SiRecord {
    pub field_point: usize,
    pub pinning: usize,
    pub rho: f64,
}

/// Grid estimate of complete SI for a table; fields multiply the `+1`
/// weights of free vertices.
pub fn complete_si_table(table: &GibbsTable, grid: &SiGrid) -> Result<(SiEstimate, Vec<SiRecord>)> {
    let n = table.n();
    let pts = grid.points(n);
    if pts.iter().any(|p| p.len() != n || p.iter().any(|&x| !(x > 0.0 && x <= 1.0))) {
        return Err(Error::Param("grid fields must lie in (0,1]^V".into()));
    }
    let results: Vec<Result<(GridPoint, PinningSweep, Vec<SiRecord>)>> = pts
        .par_iter()
        .enumerate()
        .map(|(id, phi)| {
            let t = table.reweight(phi)?;
            let rows = rho_per_pinning(&t)?;
            let records = rows.iter().map(|r| SiRecord { field_point: id, pinning: r.0, rho: r.3 }).collect();
            let sweep = fold_sweep(&rows, n);
            Ok((GridPoint { id, field: phi.clone(), eta: sweep.eta, witness: sweep.witness.clone() }, sweep, records))
        })
        .collect();
    let mut est = SiEstimate { eta_hat: 0.0, argmax: 0, eta_signed: 0.0, flavor_disagreements: 0, points: Vec::new() };
    let mut records = Vec::new();
    for r in results {
        let (gp, sweep, recs) = r?;
        if gp.eta > est.eta_hat {
            est.eta_hat = gp.eta;
            est.argmax = gp.id;
        }
        est.eta_signed = est.eta_signed.max(sweep.eta_signed);
        est.flavor_disagreements += sweep.flavor_disagreements;
        est.points.push(gp);
        records.extend(recs);
    }
    Ok((est, records))
}

pub fn complete_si_estimate(system: &TwoSpinSystem, grid: &SiGrid) -> Result<SiEstimate> {
    if system.n() > 6 {
        return Err(Error::Cap("complete SI sweeps support n <= 6".into()));
    }
    let table = GibbsTable::enumerate(system)?;
    Ok(complete_si_table(&table, grid)?.0)
}

/// `χ_v = +1` iff `λ_v ≤ (γ/β)^{Δ_v/2}`, with `γ/0 = +∞`.
pub fn good_direction(system: &TwoSpinSystem) -> DirectionVector {
    let chi = (0..system.n())
        .map(|v| {
            if system.beta() == 0.0 {
                return 1;
            }
            let bound = (system.gamma() / system.beta()).powf(system.graph().degree(v) as f64 / 2.0);
            if system.lambda(v) <= bound {
                1
            } else {
                -1
            }
        })
        .collect();
    DirectionVector::new(chi).expect("entries are ±1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gelfand_matches_eigenvalues() {
        let m = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.0, 0.1, 0.3, 0.4, 0.0, 0.6, 0.1]);
        let want = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((gelfand_radius(&m) - want).abs() < 1e-9);
        let jordan = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        assert!((gelfand_radius(&jordan) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn edge_influence() {
        let s = TwoSpinSystem::hardcore(Graph::new(2, &[(0, 1)]).unwrap(), 1.0).unwrap();
        let t = GibbsTable::enumerate(&s).unwrap();
        let m = influence_matrix(&t, &Pinning::empty(), Flavor::Absolute).unwrap();
        assert_abs_diff_eq!(m.get(0, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.spectral_radius(), 0.5, epsilon = 1e-12);
        let sg = influence_matrix(&t, &Pinning::empty(), Flavor::Signed).unwrap();
        assert_abs_diff_eq!(sg.get(0, 1).unwrap(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn pinned_cut_decouples() {
        let s = TwoSpinSystem::hardcore(Graph::path(3).unwrap(), 1.0).unwrap();
        let t = GibbsTable::enumerate(&s).unwrap();
        let m = influence_matrix(&t, &Pinning::new(&[(1, -1)]).unwrap(), Flavor::Absolute).unwrap();
        assert_eq!(m.index, vec![0, 2]);
        assert_eq!(m.get(0, 2).unwrap(), 0.0);
    }

    #[test]
    fn directions() {
        let hc = TwoSpinSystem::hardcore(Graph::cycle(4).unwrap(), 5.0).unwrap();
        assert_eq!(good_direction(&hc).as_slice(), &[1, 1, 1, 1]);
        let is = TwoSpinSystem::ising(Graph::path(3).unwrap(), 0.5, 1.5).unwrap();
        assert_eq!(good_direction(&is).as_slice(), &[-1, -1, -1]);
        let g = TwoSpinSystem::new(Graph::path(3).unwrap(), 0.1, 0.5, 3.0).unwrap();
        // Middle vertex: (0.5/0.1)^1 = 5 ≥ 3. Ends: √5 < 3.
        assert_eq!(good_direction(&g).as_slice(), &[-1, 1, -1]);
    }

    #[test]
    fn single_vertex_has_zero_eta() {
        let s = TwoSpinSystem::hardcore(Graph::empty(1).unwrap(), 1.0).unwrap();
        let est = complete_si_estimate(&s, &SiGrid::default()).unwrap();
        assert_eq!(est.eta_hat, 0.0);
    }
}
