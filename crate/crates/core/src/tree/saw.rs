use super::{h, log_recursion, ExtReal};
use crate::error::{Error, Result};
use crate::gibbs::GibbsTable;
use crate::graph::Graph;
use crate::model::{Mask, Pinning, TwoSpinSystem};
use crate::si::{influence_matrix_masks, Flavor};
use serde::Serialize;
use std::fmt::Write as _;

/// Largest number of tree vertices built before giving up.
pub const SAW_CAP: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct SawNode {
    /// Vertex of the base graph this node copies.
    pub vertex: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// Spin fixed on a cycle-closing leaf.
    pub closing_pin: Option<i8>,
}

/// Nodes are stored in DFS preorder, so every child has a larger index
/// than its parent and node 0 is the root.
#[derive(Debug, Clone, Serialize)]
pub struct SawTree {
    pub root: usize,
    pub nodes: Vec<SawNode>,
    /// Degrees in the base graph.
    pub base_degrees: Vec<usize>,
}

/// Builds the self-avoiding-walk tree of `graph` rooted at `root`.
///
/// `ordering` lists the vertices from smallest to largest (`None` means
/// index order). When the walk `x = v_i, v_{i+1}, …, v_k = w` is closed by
/// the edge `w x`, the leaf copy of `x` is pinned to `+1` if `v_{i+1}`
/// precedes `w` in the ordering and to `−1` otherwise.
pub fn saw_tree(graph: &Graph, root: usize, ordering: Option<&[usize]>) -> Result<SawTree> {
    let n = graph.n();
    if root >= n {
        return Err(Error::Param(format!("root {root} out of range")));
    }
    if !graph.is_connected() {
        return Err(Error::Graph("SAW tree needs a connected graph".into()));
    }
    let mut rank: Vec<usize> = (0..n).collect();
    if let Some(ord) = ordering {
        let mut seen = vec![false; n];
        if ord.len() != n || ord.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
            return Err(Error::Param("ordering must be a permutation of the vertices".into()));
        }
        for (i, &v) in ord.iter().enumerate() {
            rank[v] = i;
        }
    }
    let mut b = Builder { graph, rank, nodes: Vec::new(), path: vec![root], on_path: vec![false; n] };
    b.on_path[root] = true;
    b.nodes.push(SawNode { vertex: root, parent: None, children: Vec::new(), depth: 0, closing_pin: None });
    b.expand(0)?;
    Ok(SawTree { root, nodes: b.nodes, base_degrees: graph.degrees() })
}

struct Builder<'a> {
    graph: &'a Graph,
    rank: Vec<usize>,
    nodes: Vec<SawNode>,
    path: Vec<usize>,
    on_path: Vec<bool>,
}

impl Builder<'_> {
    fn push(&mut self, parent: usize, vertex: usize, closing_pin: Option<i8>) -> Result<usize> {
        if self.nodes.len() >= SAW_CAP {
            return Err(Error::Cap(format!("SAW tree exceeds {SAW_CAP} nodes")));
        }
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(SawNode { vertex, parent: Some(parent), children: Vec::new(), depth, closing_pin });
        self.nodes[parent].children.push(id);
        Ok(id)
    }

    fn expand(&mut self, node: usize) -> Result<()> {
        let k = self.path.len();
        let w = self.path[k - 1];
        let prev = (k >= 2).then(|| self.path[k - 2]);
        for &x in self.graph.neighbors(w) {
            if Some(x) == prev {
                continue;
            }
            if self.on_path[x] {
                let i = self.path.iter().position(|&p| p == x).expect("on path");
                let next = self.path[i + 1];
                let pin = if self.rank[next] < self.rank[w] { 1 } else { -1 };
                self.push(node, x, Some(pin))?;
            } else {
                let child = self.push(node, x, None)?;
                self.path.push(x);
                self.on_path[x] = true;
                self.expand(child)?;
                self.on_path[x] = false;
                self.path.pop();
            }
        }
        Ok(())
    }
}

impl SawTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tree_degree(&self, i: usize) -> usize {
        let nd = &self.nodes[i];
        nd.children.len() + usize::from(nd.parent.is_some())
    }

    /// Copies of `v` not fixed by a cycle-closing pin.
    pub fn copies(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.nodes[i].vertex == v && self.nodes[i].closing_pin.is_none()).collect()
    }

    /// Spin fixed at node `i` by cycle closing or by the base pinning.
    pub fn node_pin(&self, i: usize, dom: Mask, plus: Mask) -> Option<i8> {
        let nd = &self.nodes[i];
        nd.closing_pin.or_else(|| (dom >> nd.vertex & 1 == 1).then(|| if plus >> nd.vertex & 1 == 1 { 1 } else { -1 }))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph saw {\n");
        for (i, nd) in self.nodes.iter().enumerate() {
            match nd.closing_pin {
                Some(p) => {
                    let sign = if p > 0 { '+' } else { '-' };
                    let _ = writeln!(s, "  {i} [label=\"{} ({sign})\", shape=box];", nd.vertex);
                }
                None => {
                    let _ = writeln!(s, "  {i} [label=\"{}\"];", nd.vertex);
                }
            }
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            for &c in &nd.children {
                let _ = writeln!(s, "  {i} -> {c};");
            }
        }
        s.push_str("}\n");
        s
    }

    /// The tree as a two-spin system with inherited fields, plus the
    /// cycle-closing pinning. Node `i` becomes vertex `i`.
    pub fn tree_system(&self, system: &TwoSpinSystem) -> Result<(TwoSpinSystem, Pinning)> {
        let mut edges = Vec::new();
        for (i, nd) in self.nodes.iter().enumerate() {
            if let Some(p) = nd.parent {
                edges.push((p, i));
            }
        }
        let g = Graph::new(self.len(), &edges)?;
        let fields = self.nodes.iter().map(|nd| system.lambda(nd.vertex)).collect();
        let sys = TwoSpinSystem::with_fields(g, system.beta(), system.gamma(), fields)?;
        let pins: Vec<(usize, i8)> =
            self.nodes.iter().enumerate().filter_map(|(i, nd)| nd.closing_pin.map(|p| (i, p))).collect();
        Ok((sys, Pinning::new(&pins)?))
    }

    fn check(&self, system: &TwoSpinSystem, dom: Mask, plus: Mask) -> Result<()> {
        if system.n() != self.base_degrees.len() {
            return Err(Error::Dimension { expected: self.base_degrees.len(), got: system.n() });
        }
        if system.graph().degrees() != self.base_degrees {
            return Err(Error::Param("system graph does not match the SAW tree".into()));
        }
        if dom >> self.root & 1 == 1 {
            return Err(Error::Precondition("root must not be pinned".into()));
        }
        let _ = plus;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeRatios {
    /// `log R_u` per node; pinned nodes carry `±∞`.
    pub log_ratio: Vec<ExtReal>,
    /// `R_r / (1 + R_r)`.
    pub root_marginal: f64,
}

/// Bottom-up marginal ratios `R_u = ν_u(+1)/ν_u(−1)` on each subtree,
/// with the base pinning copied onto every non-closing copy.
pub fn tree_marginal_ratios(saw: &SawTree, system: &TwoSpinSystem, pin: &Pinning) -> Result<TreeRatios> {
    let (dom, plus) = pin.masks(system.n())?;
    tree_marginal_ratios_masks(saw, system, dom, plus)
}

pub fn tree_marginal_ratios_masks(saw: &SawTree, system: &TwoSpinSystem, dom: Mask, plus: Mask) -> Result<TreeRatios> {
    saw.check(system, dom, plus)?;
    let (beta, gamma) = (system.beta(), system.gamma());
    let mut y = vec![ExtReal::NegInf; saw.len()];
    let mut buf = Vec::new();
    for i in (0..saw.len()).rev() {
        let nd = &saw.nodes[i];
        y[i] = match saw.node_pin(i, dom, plus) {
            Some(1) => ExtReal::PosInf,
            Some(_) => ExtReal::NegInf,
            None => {
                buf.clear();
                buf.extend(nd.children.iter().map(|&c| y[c]));
                log_recursion(beta, gamma, system.lambda(nd.vertex), &buf)
            }
        };
    }
    let root_marginal = match y[0] {
        ExtReal::NegInf => 0.0,
        ExtReal::PosInf => 1.0,
        ExtReal::Finite(t) => 1.0 / (1.0 + (-t).exp()),
    };
    Ok(TreeRatios { log_ratio: y, root_marginal })
}

/// Signed influence `I_T(r, û)` from the root to every free node (`None`
/// for pinned nodes and the root itself).
///
/// Along a tree edge from parent `v` to free child `u` the influence is
/// `h(log R_u)`, and influences multiply along paths. Nodes below a pinned
/// node are cut off and get zero.
pub fn tree_influences(saw: &SawTree, system: &TwoSpinSystem, dom: Mask, plus: Mask) -> Result<Vec<Option<f64>>> {
    let ratios = tree_marginal_ratios_masks(saw, system, dom, plus)?;
    let (beta, gamma) = (system.beta(), system.gamma());
    let mut inf = vec![None; saw.len()];
    // Through-value carried to children: zero once the path is blocked.
    let mut carry = vec![0.0f64; saw.len()];
    carry[0] = if ratios.log_ratio[0] == ExtReal::NegInf { 0.0 } else { 1.0 };
    for i in 1..saw.len() {
        let p = saw.nodes[i].parent.expect("non-root");
        if saw.node_pin(i, dom, plus).is_some() {
            carry[i] = 0.0;
            continue;
        }
        let v = carry[p] * h(beta, gamma, ratios.log_ratio[i]);
        inf[i] = Some(v);
        carry[i] = v;
    }
    Ok(inf)
}

#[derive(Debug, Clone, Serialize)]
pub struct PreservationRow {
    pub vertex: usize,
    pub graph: f64,
    pub tree_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeInfluenceReport {
    pub root: usize,
    /// `Σ_û Δ_{T,û} |I_T(r, û)|` over free nodes.
    pub tree_total: f64,
    /// `Σ_v Δ_{G,v} |I_G(r, v)|` over free vertices.
    pub graph_total: f64,
    pub rows: Vec<PreservationRow>,
    pub max_residual: f64,
}

/// Weighted total influence on the tree, and the comparison of each
/// graph influence `I_G(r,u)` with the sum over the free copies of `u`.
pub fn tree_total_influence(saw: &SawTree, system: &TwoSpinSystem, pin: &Pinning) -> Result<TreeInfluenceReport> {
    let (dom, plus) = pin.masks(system.n())?;
    let table = GibbsTable::enumerate(system)?;
    tree_total_influence_table(saw, system, &table, dom, plus)
}

/// As [`tree_total_influence`], reusing an unpinned table of `system`.
pub fn tree_total_influence_table(
    saw: &SawTree,
    system: &TwoSpinSystem,
    table: &GibbsTable,
    dom: Mask,
    plus: Mask,
) -> Result<TreeInfluenceReport> {
    let inf = tree_influences(saw, system, dom, plus)?;
    let tree_total = (1..saw.len()).filter_map(|i| inf[i].map(|x| saw.tree_degree(i) as f64 * x.abs())).sum();
    let gm = influence_matrix_masks(table, dom, plus, Flavor::Signed)?;
    let r = saw.root;
    let mut rows = Vec::new();
    let mut graph_total = 0.0;
    let mut max_residual: f64 = 0.0;
    for u in (0..system.n()).filter(|&u| u != r && dom >> u & 1 == 0) {
        let g = gm.get(r, u).unwrap_or(0.0);
        let t: f64 = saw.copies(u).iter().filter_map(|&i| inf[i]).sum();
        graph_total += system.graph().degree(u) as f64 * g.abs();
        max_residual = max_residual.max((g - t).abs());
        rows.push(PreservationRow { vertex: u, graph: g, tree_sum: t });
    }
    Ok(TreeInfluenceReport { root: r, tree_total, graph_total, rows, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tree_shapes() {
        let free = |t: &SawTree| t.nodes.iter().filter(|n| n.closing_pin.is_none()).count();
        let t = saw_tree(&Graph::cycle(3).unwrap(), 0, None).unwrap();
        assert_eq!((t.len(), free(&t)), (7, 5));
        let t = saw_tree(&Graph::cycle(4).unwrap(), 0, None).unwrap();
        assert_eq!((t.len(), free(&t)), (9, 7));
        assert!(t.nodes.iter().filter(|n| n.closing_pin.is_some()).all(|n| n.depth == 4 && n.vertex == 0));
        let p = saw_tree(&Graph::path(4).unwrap(), 1, None).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.nodes.iter().all(|n| n.closing_pin.is_none()));
    }

    #[test]
    fn star_ratio() {
        let sys = TwoSpinSystem::hardcore(Graph::star(2).unwrap(), 1.0).unwrap();
        let t = saw_tree(sys.graph(), 0, None).unwrap();
        let r = tree_marginal_ratios(&t, &sys, &Pinning::empty()).unwrap();
        assert!((r.log_ratio[0].exp() - 0.25).abs() < 1e-15);
        assert!((r.root_marginal - 0.2).abs() < 1e-15);
    }

    #[test]
    fn dot_lists_every_edge() {
        let t = saw_tree(&Graph::cycle(3).unwrap(), 0, None).unwrap();
        let dot = t.to_dot();
        assert_eq!(dot.matches("->").count(), 6);
        assert_eq!(dot.matches("shape=box").count(), 2);
    }
}
