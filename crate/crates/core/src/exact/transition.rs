//! Exact one-step transition matrices over the support of a table.

use crate::dynamics::{DynamicsKind, HyperGeoParams};
use crate::error::{param, Error, Result};
use crate::gibbs::GibbsTable;
use crate::model::{subsets_of, Mask};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Largest `n` for which a dense matrix over `Ω(μ)` is built.
pub const MATRIX_CAP: usize = 12;

/// Which vertices the Glauber chain picks from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlauberPick {
    /// Uniform over the table's free vertices.
    #[default]
    Free,
    /// Uniform over all `n` vertices; picking a pinned vertex is a no-op.
    All,
}

#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub kind: DynamicsKind,
    pub table: GibbsTable,
    pub p: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn max_row_error(&self) -> f64 {
        (0..self.dim()).map(|i| (self.p.row(i).sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖μP − μ‖∞`.
    pub fn stationarity_residual(&self) -> f64 {
        let mu = self.table.probs();
        (0..self.dim())
            .map(|j| ((0..self.dim()).map(|i| mu[i] * self.p[(i, j)]).sum::<f64>() - mu[j]).abs())
            .fold(0.0, f64::max)
    }
}

fn check_cap(table: &GibbsTable) -> Result<()> {
    if table.n() > MATRIX_CAP {
        return Err(Error::Cap(format!("transition matrices need n <= {MATRIX_CAP}, got {}", table.n())));
    }
    Ok(())
}

pub fn transition_matrix(kind: &DynamicsKind, table: &GibbsTable) -> Result<TransitionMatrix> {
    let free = table.free_mask().count_ones() as usize;
    kind.validate(free)?;
    let p = match *kind {
        DynamicsKind::Glauber => glauber(table, GlauberPick::Free)?,
        DynamicsKind::Block { ell } => block(table, ell)?,
        DynamicsKind::Field { theta } => field(table, theta)?,
        DynamicsKind::ProjectedBlock { k, ell } => projected_block(table, k, ell)?,
    };
    Ok(TransitionMatrix { kind: *kind, table: table.clone(), p })
}

pub fn glauber_matrix(table: &GibbsTable, pick: GlauberPick) -> Result<TransitionMatrix> {
    Ok(TransitionMatrix { kind: DynamicsKind::Glauber, table: table.clone(), p: glauber(table, pick)? })
}

fn glauber(table: &GibbsTable, pick: GlauberPick) -> Result<DMatrix<f64>> {
    check_cap(table)?;
    let m = table.len();
    let free = table.free_vertices();
    let mut p = DMatrix::zeros(m, m);
    let count = match pick {
        GlauberPick::Free => free.len(),
        GlauberPick::All => table.n(),
    };
    if free.is_empty() || count == 0 {
        return Ok(DMatrix::identity(m, m));
    }
    let w = 1.0 / count as f64;
    let mu = table.probs();
    for (i, &s) in table.states().iter().enumerate() {
        p[(i, i)] += w * (count - free.len()) as f64;
        for &v in &free {
            match table.index_of(s ^ (1 << v)) {
                Some(j) => {
                    let z = mu[i] + mu[j];
                    p[(i, j)] += w * mu[j] / z;
                    p[(i, i)] += w * mu[i] / z;
                }
                None => p[(i, i)] += w,
            }
        }
    }
    Ok(p)
}

fn combinations(items: &[usize], ell: usize) -> Vec<Mask> {
    let n = items.len();
    let mut out = Vec::new();
    if ell > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..ell).collect();
    loop {
        out.push(idx.iter().fold(0, |m, &i| m | 1 << items[i]));
        let mut i = ell;
        while i > 0 && idx[i - 1] == n - ell + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..ell {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn block(table: &GibbsTable, ell: usize) -> Result<DMatrix<f64>> {
    check_cap(table)?;
    let free = table.free_vertices();
    if ell == 0 || ell > free.len() {
        return param(format!("ell must lie in [1, {}]", free.len()));
    }
    let m = table.len();
    let mu = table.probs();
    let subsets = combinations(&free, ell);
    let w = 1.0 / subsets.len() as f64;
    let mut p = DMatrix::zeros(m, m);
    for s_mask in subsets {
        let mut groups: HashMap<Mask, Vec<usize>> = HashMap::new();
        for (i, &s) in table.states().iter().enumerate() {
            groups.entry(s & !s_mask).or_default().push(i);
        }
        for members in groups.values() {
            let z: f64 = members.iter().map(|&j| mu[j]).sum();
            for &i in members {
                for &j in members {
                    p[(i, j)] += w * mu[j] / z;
                }
            }
        }
    }
    Ok(p)
}

/// `Σ_{τ ⊇ R} π(τ)` for every `R`, summing over the free bits only.
fn superset_mass(table: &GibbsTable, weights: &[f64], free: Mask) -> Vec<f64> {
    let mut arr = vec![0.0; 1 << table.n()];
    for (&s, &w) in table.states().iter().zip(weights) {
        arr[s as usize] += w;
    }
    for v in 0..table.n() {
        if free >> v & 1 == 0 {
            continue;
        }
        let bit = 1 << v;
        for mask in 0..arr.len() {
            if mask & bit == 0 {
                arr[mask] += arr[mask | bit];
            }
        }
    }
    arr
}

/// The field dynamics `P_FD(θ)`:
///
/// ```text
/// P(σ,τ) = Σ_{R ⊆ σ⁺ ∩ τ⁺} (1−θ)^{|R|} θ^{|σ⁺|−|R|} π^{1_R}(τ),   π = μ^{(θ)}
/// ```
///
/// with `σ⁺` restricted to free vertices.
fn field(table: &GibbsTable, theta: f64) -> Result<DMatrix<f64>> {
    check_cap(table)?;
    if !(theta > 0.0 && theta < 1.0) {
        return param("theta must lie in (0,1)");
    }
    let free = table.free_mask();
    let phi: Vec<f64> = (0..table.n()).map(|v| if free >> v & 1 == 1 { theta } else { 1.0 }).collect();
    let pi = table.reweight(&phi)?;
    // `pi` has the same support as `table`, in the same order.
    let pw = pi.probs();
    let zr = superset_mass(table, pw, free);
    let pin_plus = table.pinned_plus();
    let m = table.len();
    let states = table.states();
    let mut p = DMatrix::zeros(m, m);
    for (i, &s) in states.iter().enumerate() {
        let sp = s & free;
        let k = sp.count_ones() as i32;
        for r in subsets_of(sp) {
            let rc = r.count_ones() as i32;
            let w = (1.0 - theta).powi(rc) * theta.powi(k - rc);
            let z = zr[(r | pin_plus) as usize];
            for (j, &t) in states.iter().enumerate() {
                if t & r == r {
                    p[(i, j)] += w * pw[j] / z;
                }
            }
        }
    }
    Ok(p)
}

/// The chain 𝓜 on an unpinned table:
///
/// ```text
/// 𝓜(X,Y) = Σ_a HG(a) Σ_{R ⊆ X⁺∩Y⁺} ∏_{X⁺∖R} b_v ∏_R (1−b_v) · μ(Y) ∏_{Y⁺∖R} b_v / Z_b(R)
/// ```
///
/// with `b = a/k` and `Z_b(R) = Σ_{Z ⊇ R} μ(Z) ∏_{Z⁺∖R} b_v`.
fn projected_block(table: &GibbsTable, k: usize, ell: usize) -> Result<DMatrix<f64>> {
    check_cap(table)?;
    if table.pinned_mask() != 0 {
        return param("projected block matrix is defined for unpinned tables");
    }
    let n = table.n();
    let hg = HyperGeoParams::new(n, k, ell)?;
    let m = table.len();
    let mu = table.probs();
    let states = table.states();
    let full = table.full_mask();
    let mut p = DMatrix::zeros(m, m);
    let mut prodb = vec![1.0; 1 << n];
    let mut zb = vec![0.0; 1 << n];
    for a in hg.support() {
        let weight = hg.pmf(&a);
        if weight == 0.0 {
            continue;
        }
        let b: Vec<f64> = a.iter().map(|&x| x as f64 / k as f64).collect();
        for mask in 0..(1usize << n) {
            prodb[mask] = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| b[v]).product();
        }
        for r in 0..=full {
            zb[r as usize] = states
                .iter()
                .zip(mu)
                .filter(|(&z, _)| z & r == r)
                .map(|(&z, &q)| q * prodb[(z & !r) as usize])
                .sum();
        }
        for (i, &x) in states.iter().enumerate() {
            for r in subsets_of(x) {
                let stay: f64 = (0..n).filter(|&v| r >> v & 1 == 1).map(|v| 1.0 - b[v]).product();
                let coef = weight * prodb[(x & !r) as usize] * stay;
                if coef == 0.0 || zb[r as usize] == 0.0 {
                    continue;
                }
                for (j, &y) in states.iter().enumerate() {
                    if y & r == r {
                        p[(i, j)] += coef * mu[j] * prodb[(y & !r) as usize] / zb[r as usize];
                    }
                }
            }
        }
    }
    Ok(p)
}

/// Pushes a chain on a lifted table (k copies per vertex) forward to the
/// base space: `Q(X,Y) = Σ_{x ↦ X} μ_k(x | X) Σ_{y ↦ Y} P(x,y)`.
pub fn project_matrix(lifted: &TransitionMatrix, base: &GibbsTable, k: usize) -> Result<DMatrix<f64>> {
    let n = base.n();
    if lifted.table.n() != n * k {
        return Err(Error::Dimension { expected: n * k, got: lifted.table.n() });
    }
    let m = base.len();
    let mut q = DMatrix::zeros(m, m);
    let lt = &lifted.table;
    for (i, &x) in lt.states().iter().enumerate() {
        let xi = base.index_of(crate::dynamics::project(x, n, k)).ok_or(Error::Infeasible)?;
        let wx = lt.probs()[i] / base.probs()[xi];
        for (j, &y) in lt.states().iter().enumerate() {
            let pij = lifted.p[(i, j)];
            if pij != 0.0 {
                let yi = base.index_of(crate::dynamics::project(y, n, k)).ok_or(Error::Infeasible)?;
                q[(xi, yi)] += wx * pij;
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_all() {
        assert_eq!(combinations(&[0, 1, 2, 3], 2).len(), 6);
        assert_eq!(combinations(&[1, 3], 2), vec![0b1010]);
        assert_eq!(combinations(&[0, 1, 2], 1), vec![1, 2, 4]);
        assert_eq!(combinations(&[0, 1, 2, 3, 4], 3).len(), 10);
        assert_eq!(combinations(&[0, 1, 2], 3), vec![7]);
    }
}
