//! Exact Gibbs tables: the support of a distribution over `{−1,+1}^n`
//! with normalized probabilities, in canonical (lexicographic) order.
//!
//! A table may carry a pinning. Pinned vertices are fixed in every state
//! and excluded from the table's free set.

use crate::error::{Error, Result};
use crate::model::{lex_key, DirectionVector, Mask, Pinning, TwoSpinSystem};
use serde::Serialize;

/// Largest `n` for which a table is enumerated.
pub const TABLE_CAP: usize = 16;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct GibbsTable {
    n: usize,
    states: Vec<Mask>,
    probs: Vec<f64>,
    log_z: f64,
    pin_dom: Mask,
    pin_plus: Mask,
    lookup: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableEntry {
    pub state: String,
    pub prob: f64,
}

impl GibbsTable {
    /// Enumerates all `2^n` configurations of the system.
    pub fn enumerate(system: &TwoSpinSystem) -> Result<Self> {
        let n = system.n();
        if n > TABLE_CAP {
            return Err(Error::Cap(format!("exact enumeration supports n <= {TABLE_CAP}, got {n}")));
        }
        let logs: Vec<(Mask, f64)> = (0..(1u32 << n)).map(|m| (m, system.log_weight(m))).collect();
        assert!(logs[0].1.is_finite(), "all-minus configuration must have positive weight");
        Self::from_log_weights(n, logs, 0, 0)
    }

    /// Builds a table from unnormalized log-weights. Entries equal to `-inf`
    /// are dropped.
    pub fn from_log_weights(n: usize, entries: Vec<(Mask, f64)>, pin_dom: Mask, pin_plus: Mask) -> Result<Self> {
        if n > 32 {
            return Err(Error::Cap("tables support at most 32 vertices".into()));
        }
        let mut entries: Vec<(Mask, f64)> = entries.into_iter().filter(|e| e.1 > f64::NEG_INFINITY).collect();
        if entries.is_empty() {
            return Err(Error::Infeasible);
        }
        let max = entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = entries.iter().map(|e| (e.1 - max).exp()).sum();
        let log_z = max + total.ln();
        entries.sort_by_key(|e| lex_key(e.0, n));
        let states: Vec<Mask> = entries.iter().map(|e| e.0).collect();
        let probs: Vec<f64> = entries.iter().map(|e| (e.1 - max).exp() / total).collect();
        let lookup = build_lookup(n, &states)?;
        Ok(Self { n, states, probs, log_z, pin_dom, pin_plus, lookup })
    }

    /// Builds a table from nonnegative weights; zero weights are dropped.
    pub fn from_weights(n: usize, entries: impl IntoIterator<Item = (Mask, f64)>) -> Result<Self> {
        let logs = entries.into_iter().map(|(m, w)| (m, if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }));
        Self::from_log_weights(n, logs.collect(), 0, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Mask] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Partition value. For conditioned tables this is the restricted mass.
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn pinned_mask(&self) -> Mask {
        self.pin_dom
    }

    /// Pinned vertices whose value is `+1`.
    pub fn pinned_plus(&self) -> Mask {
        self.pin_plus
    }

    pub fn pinning(&self) -> Pinning {
        Pinning::from_masks(self.pin_dom, self.pin_plus, self.n)
    }

    pub fn full_mask(&self) -> Mask {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Vertices not pinned.
    pub fn free_mask(&self) -> Mask {
        self.full_mask() & !self.pin_dom
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        let f = self.free_mask();
        (0..self.n).filter(|&v| f >> v & 1 == 1).collect()
    }

    pub fn index_of(&self, mask: Mask) -> Option<usize> {
        match self.lookup.get(mask as usize) {
            Some(&i) if i != NONE => Some(i as usize),
            _ => None,
        }
    }

    pub fn prob_of(&self, mask: Mask) -> f64 {
        self.index_of(mask).map_or(0.0, |i| self.probs[i])
    }

    pub fn mu_min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Probability that `v` is `+1`.
    pub fn marginal_plus(&self, v: usize) -> f64 {
        self.states.iter().zip(&self.probs).filter(|(s, _)| *s >> v & 1 == 1).map(|(_, p)| p).sum()
    }

    pub fn entries(&self) -> Vec<TableEntry> {
        self.states
            .iter()
            .zip(&self.probs)
            .map(|(&s, &p)| TableEntry {
                state: crate::model::Configuration::from_mask(s, self.n).to_string(),
                prob: p,
            })
            .collect()
    }

    /// Restricts to states agreeing with `dom`/`plus`, renormalized.
    pub fn condition_masks(&self, dom: Mask, plus: Mask) -> Result<Self> {
        let plus = plus & dom;
        let entries: Vec<(Mask, f64)> = self
            .states
            .iter()
            .zip(&self.probs)
            .filter(|(&s, _)| s & dom == plus)
            .map(|(&s, &p)| (s, p.ln() + self.log_z))
            .collect();
        if entries.is_empty() {
            return Err(Error::Infeasible);
        }
        Self::from_log_weights(self.n, entries, self.pin_dom | dom, (self.pin_plus & !dom) | plus)
    }

    pub fn conditional(&self, pin: &Pinning) -> Result<Self> {
        let (dom, plus) = pin.masks(self.n)?;
        self.condition_masks(dom, plus)
    }

    /// Whether some state agrees with the pinning.
    pub fn is_feasible_masks(&self, dom: Mask, plus: Mask) -> bool {
        self.states.iter().any(|&s| s & dom == plus & dom)
    }

    /// Reweights by `∏_{v: σ_v = +1} φ_v`. Zero fields are allowed and remove
    /// states; the result keeps this table's pinning.
    pub fn reweight(&self, phi: &[f64]) -> Result<Self> {
        if phi.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: phi.len() });
        }
        if phi.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Param("reweighting fields must be nonnegative".into()));
        }
        let logphi: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
        let entries = self
            .states
            .iter()
            .zip(&self.probs)
            .map(|(&s, &p)| {
                let mut l = p.ln() + self.log_z;
                for (v, lp) in logphi.iter().enumerate() {
                    if s >> v & 1 == 1 {
                        l += lp;
                    }
                }
                (s, l)
            })
            .collect();
        Self::from_log_weights(self.n, entries, self.pin_dom, self.pin_plus)
    }

    /// `ν(σ) = μ(σ ⊙ χ)`.
    pub fn flip(&self, chi: &DirectionVector) -> Result<Self> {
        if chi.as_slice().len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: chi.as_slice().len() });
        }
        let f = chi.flip_mask();
        let entries = self.states.iter().zip(&self.probs).map(|(&s, &p)| (s ^ f, p.ln() + self.log_z)).collect();
        let plus = (self.pin_plus ^ f) & self.pin_dom;
        Self::from_log_weights(self.n, entries, self.pin_dom, plus)
    }

    /// Maximum absolute difference in probabilities over the union of supports.
    pub fn max_abs_diff(&self, other: &GibbsTable) -> f64 {
        let mut d: f64 = 0.0;
        for (&s, &p) in self.states.iter().zip(&self.probs) {
            d = d.max((p - other.prob_of(s)).abs());
        }
        for (&s, &p) in other.states.iter().zip(&other.probs) {
            d = d.max((p - self.prob_of(s)).abs());
        }
        d
    }

    /// Total variation distance to another table on the same vertex set.
    pub fn tv(&self, other: &GibbsTable) -> f64 {
        let mut d = 0.0;
        for (&s, &p) in self.states.iter().zip(&self.probs) {
            d += (p - other.prob_of(s)).abs();
        }
        for (&s, &p) in other.states.iter().zip(&other.probs) {
            if self.index_of(s).is_none() {
                d += p;
            }
        }
        d / 2.0
    }
}

fn build_lookup(n: usize, states: &[Mask]) -> Result<Vec<u32>> {
    if n > 24 {
        return Err(Error::Cap("dense state lookup supports n <= 24".into()));
    }
    let mut lookup = vec![NONE; 1usize << n];
    for (i, &s) in states.iter().enumerate() {
        lookup[s as usize] = i as u32;
    }
    Ok(lookup)
}
