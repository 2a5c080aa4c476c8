//! Multivariate hypergeometric distribution: `n` buckets of `k` balls each,
//! `ℓ` balls drawn without replacement, `a_v` counting draws from bucket `v`.
//!
//! ```text
//! Pr[a] = ∏_v C(k, a_v) / C(kn, ℓ)
//! ```

use crate::error::{param, Result};
use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperGeoParams {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
}

impl HyperGeoParams {
    pub fn new(n: usize, k: usize, ell: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return param("hypergeometric needs n >= 1 and k >= 1");
        }
        if ell > k * n {
            return param(format!("ell = {ell} exceeds kn = {}", k * n));
        }
        Ok(Self { n, k, ell })
    }

    pub fn pmf(&self, a: &[usize]) -> f64 {
        if a.len() != self.n || a.iter().sum::<usize>() != self.ell || a.iter().any(|&x| x > self.k) {
            return 0.0;
        }
        let k = self.k as u64;
        let num: f64 = a.iter().map(|&x| ln_binomial(k, x as u64)).sum();
        (num - ln_binomial(k * self.n as u64, self.ell as u64)).exp()
    }

    /// Every vector in the support, in lexicographic order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0; self.n];
        fill(0, self.ell, self.k, &mut cur, &mut out);
        out
    }

    /// Draws bucket by bucket: `a_1 ~ HG(kn, k, ℓ)`, then the remaining
    /// draws over the remaining buckets.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut a = vec![0; self.n];
        let mut left = self.ell as u64;
        for v in 0..self.n {
            let remaining = (self.k * (self.n - v)) as u64;
            if v + 1 == self.n {
                a[v] = left as usize;
                break;
            }
            if left == 0 {
                break;
            }
            let hg = Hypergeometric::new(remaining, self.k as u64, left).expect("valid hypergeometric parameters");
            let x = hg.sample(rng);
            a[v] = x as usize;
            left -= x;
        }
        a
    }
}

fn fill(v: usize, left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let n = cur.len();
    if v + 1 == n {
        if left <= k {
            cur[v] = left;
            out.push(cur.clone());
        }
        return;
    }
    let rest = k * (n - v - 1);
    let lo = left.saturating_sub(rest);
    for x in lo..=left.min(k) {
        cur[v] = x;
        fill(v + 1, left - x, k, cur, out);
    }
    cur[v] = 0;
}

/// Samples a multivariate hypergeometric vector.
pub fn hypergeo_sample<R: Rng + ?Sized>(params: &HyperGeoParams, rng: &mut R) -> Vec<usize> {
    params.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_mass_functions() {
        let p = HyperGeoParams::new(2, 1, 1).unwrap();
        assert_abs_diff_eq!(p.pmf(&[1, 0]), 0.5, epsilon = 1e-14);
        let p = HyperGeoParams::new(2, 2, 2).unwrap();
        assert_abs_diff_eq!(p.pmf(&[1, 1]), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.pmf(&[2, 0]), 1.0 / 6.0, epsilon = 1e-14);
        let p = HyperGeoParams::new(1, 5, 3).unwrap();
        assert_eq!(p.support(), vec![vec![3]]);
        assert!(HyperGeoParams::new(2, 2, 5).is_err());
    }

    #[test]
    fn support_sums_to_one() {
        for (n, k, l) in [(3, 3, 4), (4, 2, 3), (2, 64, 64), (1, 3, 0)] {
            let p = HyperGeoParams::new(n, k, l).unwrap();
            let s: f64 = p.support().iter().map(|a| p.pmf(a)).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }
}
