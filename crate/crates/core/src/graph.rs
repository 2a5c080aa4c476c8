//! Simple undirected graphs, the edge-list text format, and a small atlas
//! of connected graphs used by the exhaustive sweeps.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a simple graph. Edges are normalized to `(min, max)` and
    /// neighbor lists are sorted.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph must have at least one vertex".into()));
        }
        let mut seen = HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::Graph(format!("duplicate edge ({},{})", e.0, e.1)));
            }
            norm.push(e);
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Ok(Self { n, edges: norm, adj })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, &[])
    }

    pub fn path(n: usize) -> Result<Self> {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &e)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Graph("cycle needs n >= 3".into()));
        }
        let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        e.push((0, n - 1));
        Self::new(n, &e)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        Self::new(n, &e)
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self> {
        let e: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::new(leaves + 1, &e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: perm.len() });
        }
        let e: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(self.n, &e)
    }

    /// Parses the edge-list format: a header `n m`, then `m` lines `u v`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Graph("missing header line".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let (u, v) = parse_pair(line)?;
            if u >= v || v >= n {
                return Err(Error::Graph(format!("edge line `{line}` must satisfy 0 <= u < v < n")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Graph(format!("header declares {m} edges, found {}", edges.len())));
        }
        Self::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    fn edge_bits(&self) -> u64 {
        let mut bits = 0u64;
        for &(a, b) in &self.edges {
            bits |= 1 << pair_index(self.n, a, b);
        }
        bits
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Graph(format!("expected two integers in `{line}`")))?
            .parse()
            .map_err(|_| Error::Graph(format!("bad integer in `{line}`")))
    };
    let a = next()?;
    let b = next()?;
    Ok((a, b))
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut p, &mut out);
    out
}

fn heap_permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, p, out);
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

/// All connected graphs on `n` vertices up to isomorphism (n <= 6).
///
/// Brute force: every labeled graph is reduced to the minimum edge bitmask
/// over all vertex permutations. Counts are 1, 1, 2, 6, 21, 112.
pub fn connected_graphs(n: usize) -> Result<Vec<Graph>> {
    if n == 0 || n > 6 {
        return Err(Error::Cap(format!("graph atlas covers 1 <= n <= 6, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let m = pairs.len();
    let perms = permutations(n);
    // Image of each pair index under each permutation.
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(a, b)| pair_index(n, p[a], p[b])).collect())
        .collect();
    let mut canon = HashSet::new();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << m) {
        let edges: Vec<_> = (0..m).filter(|i| bits >> i & 1 == 1).map(|i| pairs[i]).collect();
        if edges.len() + 1 < n {
            continue;
        }
        let g = Graph::new(n, &edges)?;
        if !g.is_connected() {
            continue;
        }
        let mut best = u64::MAX;
        for map in &maps {
            let mut img = 0u64;
            for (i, &j) in map.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    img |= 1 << j;
                }
            }
            best = best.min(img);
        }
        if canon.insert(best) {
            let edges: Vec<_> = (0..m).filter(|i| best >> i & 1 == 1).map(|i| pairs[i]).collect();
            out.push(Graph::new(n, &edges)?);
        }
    }
    out.sort_by_key(|g| (g.edges.len(), g.edge_bits()));
    Ok(out)
}

/// Connected graphs for every order `1..=nmax`.
pub fn connected_graphs_up_to(nmax: usize) -> Result<Vec<Graph>> {
    let mut all = Vec::new();
    for n in 1..=nmax {
        all.extend(connected_graphs(n)?);
    }
    Ok(all)
}
