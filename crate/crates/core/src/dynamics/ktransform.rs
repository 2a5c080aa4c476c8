//! The k-transformation: each vertex `v` becomes `k` copies `(v, i)`,
//! indexed `v·k + i`. A `−1` vertex lifts to all-`−1` copies; a `+1`
//! vertex lifts to exactly one `+1` copy chosen uniformly.

use crate::error::{param, Error, Result};
use crate::gibbs::GibbsTable;
use crate::model::Mask;
use rand::Rng;

/// Largest `kn` for the exact lifted table.
pub const LIFT_CAP: usize = 16;

/// Exact enumeration of `μ_k`.
pub fn k_transform_table(table: &GibbsTable, k: usize) -> Result<GibbsTable> {
    if k == 0 {
        return param("k must be at least 1");
    }
    let n = table.n();
    if n * k > LIFT_CAP {
        return Err(Error::Cap(format!("lifted table needs kn <= {LIFT_CAP}, got {}", n * k)));
    }
    let lk = (k as f64).ln();
    let mut entries = Vec::new();
    for (&s, &p) in table.states().iter().zip(table.probs()) {
        let plus: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        let lw = p.ln() - lk * plus.len() as f64;
        let mut choice = vec![0usize; plus.len()];
        loop {
            let mut y: Mask = 0;
            for (j, &v) in plus.iter().enumerate() {
                y |= 1 << (v * k + choice[j]);
            }
            entries.push((y, lw));
            // Odometer over choices.
            let mut j = 0;
            while j < choice.len() {
                choice[j] += 1;
                if choice[j] < k {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == choice.len() {
                break;
            }
        }
    }
    GibbsTable::from_log_weights(n * k, entries, 0, 0)
}

/// `σ*_v = +1` iff some copy of `v` is `+1`.
pub fn project(lifted: Mask, n: usize, k: usize) -> Mask {
    let block: Mask = if k >= 32 { u32::MAX } else { (1 << k) - 1 };
    (0..n).filter(|&v| lifted >> (v * k) & block != 0).fold(0, |m, v| m | 1 << v)
}

/// Draws `X ~ μ` by inverse CDF in canonical order, then lifts it.
/// Returns the lifted spins, length `kn`.
pub fn k_transform_sample<R: Rng + ?Sized>(table: &GibbsTable, k: usize, rng: &mut R) -> Result<Vec<i8>> {
    if k == 0 {
        return param("k must be at least 1");
    }
    let n = table.n();
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut x = *table.states().last().expect("tables are nonempty");
    for (&s, &p) in table.states().iter().zip(table.probs()) {
        acc += p;
        if u < acc {
            x = s;
            break;
        }
    }
    let mut y = vec![-1i8; n * k];
    for v in 0..n {
        if x >> v & 1 == 1 {
            let i = rng.gen_range(0..k);
            y[v * k + i] = 1;
        }
    }
    Ok(y)
}
