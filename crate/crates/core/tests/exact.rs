use nalgebra::DMatrix;
use proptest::prelude::*;
use spinlab::dynamics::DynamicsKind;
use spinlab::exact::*;
use spinlab::graph::connected_graphs_up_to;
use spinlab::{GibbsTable, Graph, Pinning, TwoSpinSystem};

fn kinds(n: usize) -> Vec<DynamicsKind> {
    let mut out = vec![DynamicsKind::Glauber, DynamicsKind::Field { theta: 0.3 }, DynamicsKind::Field { theta: 0.8 }];
    out.extend((1..=n).map(|ell| DynamicsKind::Block { ell }));
    out.push(DynamicsKind::ProjectedBlock { k: 2, ell: n });
    out
}

#[test]
fn chains_are_stochastic_and_reversible() {
    for g in connected_graphs_up_to(4).unwrap() {
        for (b, gm, l) in [(0.0, 1.0, 1.0), (0.5, 0.5, 1.0), (0.3, 2.0, 1.5)] {
            let table = GibbsTable::enumerate(&TwoSpinSystem::new(g.clone(), b, gm, l).unwrap()).unwrap();
            for kind in kinds(g.n()) {
                let p = transition_matrix(&kind, &table).unwrap();
                assert!(p.max_row_error() < 1e-12, "{kind:?}");
                assert!(p.min_entry() >= 0.0);
                assert!(p.stationarity_residual() < 1e-12);
                assert!(detailed_balance_residual(&p) < 1e-12, "{kind:?} on {g:?}");
                let rep = spectral_report(&p).unwrap();
                assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-10);
                assert!(rep.gap >= -1e-12 && rep.abs_gap <= rep.gap + 1e-12);
            }
        }
    }
}

#[test]
fn edge_hardcore_glauber_gap_closed_form() {
    // The nontrivial eigenvalues are both 1 − 1/(2(1+λ)).
    for l in [0.1, 1.0, 2.5, 10.0] {
        let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::path(2).unwrap(), l).unwrap()).unwrap();
        let gap = glauber_gap(&table, GlauberPick::Free).unwrap();
        assert!((gap - 1.0 / (2.0 * (1.0 + l))).abs() < 1e-12, "l={l}");
    }
}

#[test]
fn full_block_is_an_exact_sampler() {
    let table = GibbsTable::enumerate(&TwoSpinSystem::new(Graph::cycle(4).unwrap(), 0.4, 1.1, 0.9).unwrap()).unwrap();
    let p = transition_matrix(&DynamicsKind::Block { ell: 4 }, &table).unwrap();
    let mu = DMatrix::from_fn(table.len(), table.len(), |_, j| table.probs()[j]);
    assert!((&p.p - mu).abs().max() < 1e-14);
    assert!((spectral_report(&p).unwrap().gap - 1.0).abs() < 1e-10);
}

#[test]
fn pinned_single_free_vertex_has_gap_one() {
    let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::path(3).unwrap(), 2.0).unwrap()).unwrap();
    let cond = table.conditional(&Pinning::new(&[(0, -1), (2, -1)]).unwrap()).unwrap();
    assert!((glauber_gap(&cond, GlauberPick::Free).unwrap() - 1.0).abs() < 1e-12);
    // Picking among all vertices wastes two thirds of the moves.
    assert!((glauber_gap(&cond, GlauberPick::All).unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn marginal_floor_against_closed_form() {
    for g in connected_graphs_up_to(5).unwrap() {
        for (b, gm, l) in [(0.0, 1.0, 1.0), (0.0, 1.0, 0.2), (0.0, 1.5, 3.0), (0.5, 1.0, 0.8), (0.2, 0.7, 2.0)] {
            let table = GibbsTable::enumerate(&TwoSpinSystem::new(g.clone(), b, gm, l).unwrap()).unwrap();
            let exact = marginal_floor(&table).unwrap();
            assert!(table.mu_min() >= exact.powi(g.n() as i32) * (1.0 - 1e-12));
            if g.n() < 2 {
                continue;
            }
            let closed = marginal_floor_closed_form(b, gm, l, g.max_degree());
            assert!(exact >= closed * (1.0 - 1e-12), "{g:?} ({b},{gm},{l}): exact {exact} < closed {closed}");
        }
    }
}

#[test]
fn isolated_vertex_breaks_the_closed_form() {
    let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::empty(1).unwrap(), 0.2).unwrap()).unwrap();
    let exact = marginal_floor(&table).unwrap();
    assert!((exact - 1.0 / 6.0).abs() < 1e-15);
    assert!(exact < marginal_floor_closed_form(0.0, 1.0, 0.2, 0));
}

#[test]
fn mixing_bound_dominates_exact_mixing_time() {
    for g in connected_graphs_up_to(4).unwrap() {
        let table = GibbsTable::enumerate(&TwoSpinSystem::new(g.clone(), 0.3, 1.0, 1.0).unwrap()).unwrap();
        let p = glauber_matrix(&table, GlauberPick::Free).unwrap();
        let rep = spectral_report(&p).unwrap();
        let bound = mixing_time_bound(rep.abs_gap, table.mu_min(), 0.25).unwrap();
        let t = exact_mixing_time(&p, 0.25, 10_000).expect("mixes");
        assert!(t as f64 <= bound.ceil(), "{g:?}: t={t} bound={bound}");
        let curve = worst_tv_curve(&p, 50);
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn min_gap_witness_is_feasible() {
    let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::cycle(5).unwrap(), 1.0).unwrap()).unwrap();
    let mg = min_gap(&table, GlauberPick::Free).unwrap();
    let cond = table.conditional(&mg.witness).unwrap();
    assert!((glauber_gap(&cond, GlauberPick::Free).unwrap() - mg.value).abs() < 1e-12);
    assert!(mg.value <= glauber_gap(&table, GlauberPick::Free).unwrap() + 1e-12);
}

proptest! {
    #[test]
    fn field_dirichlet_identity(
        b in 0.0f64..0.9, l in 0.1f64..3.0, theta in 0.05f64..0.95,
        f in proptest::collection::vec(-5.0f64..5.0, 16),
    ) {
        let table = GibbsTable::enumerate(&TwoSpinSystem::new(Graph::cycle(4).unwrap(), b, 1.0, l).unwrap()).unwrap();
        let f = &f[..table.len()];
        let chk = field_dirichlet_identity_check(&table, theta, f).unwrap();
        prop_assert!(chk.residual < 1e-10 * chk.lhs.abs().max(1.0));
    }

    #[test]
    fn dirichlet_forms_agree_and_respect_the_gap(
        b in 0.0f64..0.9, l in 0.1f64..3.0,
        f in proptest::collection::vec(-5.0f64..5.0, 16),
    ) {
        let table = GibbsTable::enumerate(&TwoSpinSystem::new(Graph::star(3).unwrap(), b, 1.0, l).unwrap()).unwrap();
        let f = &f[..table.len()];
        let p = glauber_matrix(&table, GlauberPick::Free).unwrap();
        let fun = chain_functionals(&p, f).unwrap();
        prop_assert!((fun.dirichlet - fun.dirichlet_pairs).abs() < 1e-10);
        let gap = spectral_report(&p).unwrap().gap;
        prop_assert!(fun.dirichlet >= gap * fun.variance - 1e-10);
    }
}
