use proptest::prelude::*;
use spinlab::graph::{connected_graphs, connected_graphs_up_to};
use spinlab::model::all_pinnings;
use spinlab::tree::*;
use spinlab::{GibbsTable, Graph, Pinning, TwoSpinSystem};

/// Root marginal by enumerating the tree distribution directly.
fn brute_root_marginal(saw: &SawTree, sys: &TwoSpinSystem, pin: &Pinning) -> f64 {
    let pinned = |i: usize| saw.nodes[i].closing_pin.or_else(|| pin.get(saw.nodes[i].vertex));
    // Edges between two pinned nodes only contribute a constant factor.
    let edges: Vec<(usize, usize)> = (1..saw.len())
        .map(|i| (saw.nodes[i].parent.unwrap(), i))
        .filter(|&(p, i)| pinned(p).is_none() || pinned(i).is_none())
        .collect();
    let fields = saw.nodes.iter().map(|nd| sys.lambda(nd.vertex)).collect();
    let tsys = TwoSpinSystem::with_fields(Graph::new(saw.len(), &edges).unwrap(), sys.beta(), sys.gamma(), fields).unwrap();
    let pairs: Vec<(usize, i8)> = (0..saw.len()).filter_map(|i| pinned(i).map(|s| (i, s))).collect();
    let table = GibbsTable::enumerate(&tsys).unwrap().conditional(&Pinning::new(&pairs).unwrap()).unwrap();
    table.marginal_plus(0)
}

#[test]
fn root_marginal_matches_enumeration() {
    for g in connected_graphs_up_to(4).unwrap() {
        for (b, gm, l) in [(0.0, 1.0, 1.0), (0.3, 1.4, 0.7), (0.5, 0.5, 2.0)] {
            let sys = TwoSpinSystem::new(g.clone(), b, gm, l).unwrap();
            for r in 0..g.n() {
                let saw = saw_tree(&g, r, None).unwrap();
                if saw.len() > 16 {
                    continue;
                }
                let free = ((1u32 << g.n()) - 1) & !(1 << r);
                for (dom, plus) in all_pinnings(free) {
                    let full = GibbsTable::enumerate(&sys).unwrap();
                    if !full.is_feasible_masks(dom, plus) {
                        continue;
                    }
                    let pin = Pinning::from_masks(dom, plus, g.n());
                    let rat = tree_marginal_ratios(&saw, &sys, &pin).unwrap();
                    let brute = brute_root_marginal(&saw, &sys, &pin);
                    assert!((rat.root_marginal - brute).abs() < 1e-10, "{g:?} r={r} pin={pin:?}");
                    // Weitz: tree marginal at the root equals the graph marginal.
                    let gm = full.condition_masks(dom, plus).unwrap().marginal_plus(r);
                    assert!((rat.root_marginal - gm).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn influence_is_preserved_on_small_graphs() {
    for g in connected_graphs(5).unwrap() {
        let sys = TwoSpinSystem::hardcore(g.clone(), 1.0).unwrap();
        let table = GibbsTable::enumerate(&sys).unwrap();
        for r in 0..5 {
            let saw = saw_tree(&g, r, None).unwrap();
            let free = 0b11111 & !(1u32 << r);
            for (dom, plus) in all_pinnings(free) {
                if !table.is_feasible_masks(dom, plus) {
                    continue;
                }
                let rep = tree_total_influence_table(&saw, &sys, &table, dom, plus).unwrap();
                assert!(rep.max_residual < 1e-9, "{g:?} r={r} dom={dom:b} plus={plus:b} {rep:?}");
                assert!(rep.graph_total <= rep.tree_total + 1e-9);
            }
        }
    }
}

#[test]
fn star_total_is_symmetric() {
    let sys = TwoSpinSystem::hardcore(Graph::star(3).unwrap(), 0.8).unwrap();
    let saw = saw_tree(sys.graph(), 0, None).unwrap();
    let rep = tree_total_influence(&saw, &sys, &Pinning::empty()).unwrap();
    let leaf = rep.rows[0].graph.abs();
    assert!((rep.tree_total - 3.0 * leaf).abs() < 1e-12);
}

#[test]
fn product_distribution_has_no_influence() {
    let sys = TwoSpinSystem::with_fields(Graph::cycle(4).unwrap(), 1.0, 1.0, vec![0.7; 4]).unwrap();
    let saw = saw_tree(sys.graph(), 0, None).unwrap();
    let rep = tree_total_influence(&saw, &sys, &Pinning::empty()).unwrap();
    assert!(rep.tree_total.abs() < 1e-15);
}

#[test]
fn hardcore_pinned_leaf_blocks_root() {
    let sys = TwoSpinSystem::hardcore(Graph::path(2).unwrap(), 3.0).unwrap();
    let saw = saw_tree(sys.graph(), 0, None).unwrap();
    let r = tree_marginal_ratios(&saw, &sys, &Pinning::new(&[(1, 1)]).unwrap()).unwrap();
    assert_eq!(r.log_ratio[0], ExtReal::NegInf);
    assert_eq!(r.root_marginal, 0.0);
}

#[test]
fn disconnected_graph_rejected() {
    assert!(saw_tree(&Graph::empty(2).unwrap(), 0, None).is_err());
}

proptest! {
    #[test]
    fn log_space_matches_ratio_space(
        b in 0.0f64..0.9, g in 0.9f64..1.1, l in 0.05f64..5.0,
        rs in proptest::collection::vec(prop_oneof![Just(0.0), Just(f64::INFINITY), 1e-3f64..1e3], 1..5)
    ) {
        let ys: Vec<ExtReal> = rs.iter().map(|&r| ExtReal::log_of(r)).collect();
        let r = ratio_recursion(b, g, l, &rs);
        let y = log_recursion(b, g, l, &ys);
        if r > 0.0 && r.is_finite() {
            prop_assert!((y.to_f64() - r.ln()).abs() < 1e-10);
        } else if r == 0.0 {
            prop_assert_eq!(y, ExtReal::NegInf);
        }
    }

    #[test]
    fn h_phi_vanishes_with_h(b in 0.0f64..0.9, y in prop_oneof![Just(ExtReal::NegInf), Just(ExtReal::PosInf), (-30.0f64..30.0).prop_map(ExtReal::Finite)]) {
        let spec = PotentialSpec::sqrt_abs_h(b, 1.0).unwrap();
        if spec.h(y) == 0.0 {
            prop_assert_eq!(spec.h_phi(y), 0.0);
        } else {
            prop_assert!(spec.phi(y) > 0.0);
            prop_assert!((spec.h_phi(y) - spec.h(y).abs() / spec.phi(y)).abs() < 1e-15);
        }
    }
}
