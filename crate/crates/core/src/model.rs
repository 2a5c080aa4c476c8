//! Two-spin systems on graphs.
//!
//! A configuration `σ ∈ {−1,+1}^V` has weight
//!
//! ```text
//! w(σ) = β^{m₊(σ)} · γ^{m₋(σ)} · ∏_{v: σ_v = +1} λ_v
//! ```
//!
//! where `m₊` (`m₋`) counts edges with both endpoints `+1` (`−1`).
//! β = 0 is the hardcore model with `+1` meaning occupied; β = γ is Ising.
//!
//! Internally a configuration on at most 32 vertices is a bitmask with bit
//! `v` set iff `σ_v = +1`.

use crate::error::{param, Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Mask = u32;

/// Sort key giving lexicographic order over spin vectors with −1 < +1,
/// vertex 0 being the most significant position.
pub fn lex_key(mask: Mask, n: usize) -> Mask {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (32 - n)
    }
}

#[inline]
pub fn spin_at(mask: Mask, v: usize) -> i8 {
    if mask >> v & 1 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    spins: Vec<i8>,
}

impl Configuration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return param("spins must be -1 or +1");
        }
        Ok(Self { spins })
    }

    pub fn all_minus(n: usize) -> Self {
        Self { spins: vec![-1; n] }
    }

    pub fn from_mask(mask: Mask, n: usize) -> Self {
        Self { spins: (0..n).map(|v| spin_at(mask, v)).collect() }
    }

    pub fn to_mask(&self) -> Result<Mask> {
        if self.spins.len() > 32 {
            return Err(Error::Cap("bitmask form supports at most 32 vertices".into()));
        }
        Ok(self
            .spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |m, (v, _)| m | 1 << v))
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn get(&self, v: usize) -> i8 {
        self.spins[v]
    }

    pub fn set(&mut self, v: usize, s: i8) {
        debug_assert!(s == 1 || s == -1);
        self.spins[v] = s;
    }

    pub fn plus_count(&self) -> usize {
        self.spins.iter().filter(|&&s| s == 1).count()
    }

    /// Parses a string of `+` and `-` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => param(format!("unexpected character `{c}` in configuration")),
            })
            .collect::<Result<Vec<_>>>()
            .and_then(Self::new)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.spins {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Partial assignment `σ_Λ`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pinning {
    domain: Vec<usize>,
    values: Vec<i8>,
}

impl Pinning {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(pairs: &[(usize, i8)]) -> Result<Self> {
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|p| p.0);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return param(format!("vertex {} pinned twice", w[0].0));
            }
        }
        if sorted.iter().any(|&(_, s)| s != 1 && s != -1) {
            return param("pinned spins must be -1 or +1");
        }
        Ok(Self {
            domain: sorted.iter().map(|p| p.0).collect(),
            values: sorted.iter().map(|p| p.1).collect(),
        })
    }

    /// Builds a pinning from a domain mask and the spins encoded in `values`.
    pub fn from_masks(domain: Mask, values: Mask, n: usize) -> Self {
        let dom: Vec<usize> = (0..n).filter(|&v| domain >> v & 1 == 1).collect();
        let vals = dom.iter().map(|&v| spin_at(values, v)).collect();
        Self { domain: dom, values: vals }
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<i8> {
        self.domain.binary_search(&v).ok().map(|i| self.values[i])
    }

    /// `(domain mask, plus mask)`.
    pub fn masks(&self, n: usize) -> Result<(Mask, Mask)> {
        let mut dom = 0;
        let mut plus = 0;
        for (&v, &s) in self.domain.iter().zip(&self.values) {
            if v >= n {
                return param(format!("pinned vertex {v} out of range"));
            }
            dom |= 1 << v;
            if s == 1 {
                plus |= 1 << v;
            }
        }
        Ok((dom, plus))
    }

    pub fn agrees(&self, c: &Configuration) -> bool {
        self.domain.iter().zip(&self.values).all(|(&v, &s)| c.get(v) == s)
    }
}

/// Every partial assignment on the vertices of `free`, domain first.
/// There are `3^|free|` of them.
pub fn all_pinnings(free: Mask) -> Vec<(Mask, Mask)> {
    let verts: Vec<u32> = (0..32).filter(|&v| free >> v & 1 == 1).collect();
    let mut out = Vec::new();
    for dom in subsets_of(free) {
        for vals in subsets_of(dom) {
            out.push((dom, vals));
        }
    }
    debug_assert_eq!(out.len(), 3usize.pow(verts.len() as u32));
    out
}

/// All submasks of `m`, in increasing numeric order.
pub fn subsets_of(m: Mask) -> Vec<Mask> {
    let mut out = Vec::with_capacity(1 << m.count_ones());
    let mut s: Mask = 0;
    loop {
        out.push(s);
        if s == m {
            break;
        }
        s = (s.wrapping_sub(m)) & m;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldVector(Vec<f64>);

impl FieldVector {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return param("local fields must be positive and finite");
        }
        Ok(Self(phi))
    }

    pub fn scalar(n: usize, theta: f64) -> Result<Self> {
        Self::new(vec![theta; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn in_unit_box(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0 && p <= 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionVector(Vec<i8>);

impl DirectionVector {
    pub fn new(chi: Vec<i8>) -> Result<Self> {
        if chi.iter().any(|&s| s != 1 && s != -1) {
            return param("direction entries must be -1 or +1");
        }
        Ok(Self(chi))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// Mask of vertices with χ_v = −1, i.e. the coordinates that flip.
    pub fn flip_mask(&self) -> Mask {
        self.0.iter().enumerate().filter(|(_, &c)| c == -1).fold(0, |m, (v, _)| m | 1 << v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSpinSystem {
    graph: Graph,
    beta: f64,
    gamma: f64,
    fields: Vec<f64>,
}

impl TwoSpinSystem {
    pub fn new(graph: Graph, beta: f64, gamma: f64, lambda: f64) -> Result<Self> {
        let n = graph.n();
        Self::with_fields(graph, beta, gamma, vec![lambda; n])
    }

    pub fn with_fields(graph: Graph, beta: f64, gamma: f64, fields: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return param("gamma must be positive");
        }
        if !(beta >= 0.0) || beta > gamma {
            return param("beta must satisfy 0 <= beta <= gamma");
        }
        if fields.len() != graph.n() {
            return Err(Error::Dimension { expected: graph.n(), got: fields.len() });
        }
        if fields.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return param("vertex activities must be positive and finite");
        }
        Ok(Self { graph, beta, gamma, fields })
    }

    pub fn hardcore(graph: Graph, lambda: f64) -> Result<Self> {
        Self::new(graph, 0.0, 1.0, lambda)
    }

    pub fn ising(graph: Graph, beta: f64, lambda: f64) -> Result<Self> {
        Self::new(graph, beta, beta, lambda)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn lambda(&self, v: usize) -> f64 {
        self.fields[v]
    }

    /// The common activity if all vertices share one.
    pub fn uniform_lambda(&self) -> Option<f64> {
        let l = self.fields[0];
        self.fields.iter().all(|&x| x == l).then_some(l)
    }

    pub fn is_antiferro(&self) -> bool {
        self.beta * self.gamma < 1.0
    }

    pub fn gibbs_weight(&self, sigma: &Configuration) -> Result<f64> {
        if sigma.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: sigma.len() });
        }
        let mut mp = 0;
        let mut mm = 0;
        for &(a, b) in self.graph.edges() {
            match (sigma.get(a), sigma.get(b)) {
                (1, 1) => mp += 1,
                (-1, -1) => mm += 1,
                _ => {}
            }
        }
        // powi gives 0^0 = 1.
        let mut w = self.beta.powi(mp) * self.gamma.powi(mm);
        for v in 0..self.n() {
            if sigma.get(v) == 1 {
                w *= self.fields[v];
            }
        }
        Ok(w)
    }

    /// Log-weight of a bitmask configuration; `-inf` for zero weight.
    pub fn log_weight(&self, mask: Mask) -> f64 {
        let lb = self.beta.ln();
        let lg = self.gamma.ln();
        let mut s = 0.0;
        for &(a, b) in self.graph.edges() {
            match (mask >> a & 1, mask >> b & 1) {
                (1, 1) => s += lb,
                (0, 0) => s += lg,
                _ => {}
            }
        }
        for v in 0..self.n() {
            if mask >> v & 1 == 1 {
                s += self.fields[v].ln();
            }
        }
        s
    }

    /// λ_v ← λ_v · φ_v.
    pub fn magnetize(&self, phi: &FieldVector) -> Result<Self> {
        if phi.as_slice().len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: phi.as_slice().len() });
        }
        let fields = self.fields.iter().zip(phi.as_slice()).map(|(l, p)| l * p).collect();
        Self::with_fields(self.graph.clone(), self.beta, self.gamma, fields)
    }

    /// Conditional probability that `v` is `+1` given its neighbors in `sigma`.
    pub fn local_plus_prob(&self, sigma: &Configuration, v: usize, field_mult: f64) -> f64 {
        let mut plus = 0;
        let mut minus = 0;
        for &w in self.graph.neighbors(v) {
            if sigma.get(w) == 1 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        let wp = self.fields[v] * field_mult * self.beta.powi(plus);
        let wm = self.gamma.powi(minus);
        wp / (wp + wm)
    }

    pub fn is_feasible(&self, sigma: &Configuration) -> bool {
        sigma.len() == self.n()
            && (self.beta > 0.0
                || self.graph.edges().iter().all(|&(a, b)| !(sigma.get(a) == 1 && sigma.get(b) == 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Graph {
        Graph::new(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn weights_on_an_edge() {
        let hc = TwoSpinSystem::hardcore(edge(), 1.0).unwrap();
        assert_eq!(hc.gibbs_weight(&Configuration::parse("++").unwrap()).unwrap(), 0.0);
        assert_eq!(hc.gibbs_weight(&Configuration::parse("--").unwrap()).unwrap(), 1.0);
        let is = TwoSpinSystem::ising(edge(), 2.0, 1.0).unwrap();
        assert_eq!(is.gibbs_weight(&Configuration::parse("++").unwrap()).unwrap(), 2.0);
        assert!(hc.gibbs_weight(&Configuration::parse("+").unwrap()).is_err());
    }

    #[test]
    fn lex_key_orders_vertex_zero_first() {
        // (−,+) < (+,−) lexicographically.
        assert!(lex_key(0b10, 2) < lex_key(0b01, 2));
        assert_eq!(lex_key(0, 3), 0);
        assert_eq!(lex_key(0b111, 3), 0b111);
    }

    #[test]
    fn pinning_enumeration_has_three_to_the_n() {
        assert_eq!(all_pinnings(0b111).len(), 27);
        assert_eq!(subsets_of(0b101), vec![0, 1, 4, 5]);
    }

    #[test]
    fn parameter_validation() {
        assert!(TwoSpinSystem::new(edge(), 2.0, 1.0, 1.0).is_err());
        assert!(TwoSpinSystem::new(edge(), 0.0, 0.0, 1.0).is_err());
        assert!(TwoSpinSystem::new(edge(), 0.0, 1.0, 0.0).is_err());
        assert!(FieldVector::new(vec![0.0]).is_err());
    }
}
