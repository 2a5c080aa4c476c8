use proptest::prelude::*;
use spinlab::graph::connected_graphs_up_to;
use spinlab::model::all_pinnings;
use spinlab::si::*;
use spinlab::{Configuration, DirectionVector, GibbsTable, Graph, Pinning, TwoSpinSystem};

/// `Pr[σ_v = +1 | σ_Λ, σ_u = s]` from raw Gibbs weights.
fn cond_plus(sys: &TwoSpinSystem, fixed: &[(usize, i8)], v: usize) -> Option<f64> {
    let n = sys.n();
    let (mut num, mut den) = (0.0, 0.0);
    for m in 0..(1u32 << n) {
        let c = Configuration::from_mask(m, n);
        if fixed.iter().any(|&(w, s)| c.get(w) != s) {
            continue;
        }
        let w = sys.gibbs_weight(&c).unwrap();
        den += w;
        if c.get(v) == 1 {
            num += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

fn oracle_influence(sys: &TwoSpinSystem, pin: &[(usize, i8)], u: usize, v: usize) -> f64 {
    let with = |s: i8| {
        let mut f = pin.to_vec();
        f.push((u, s));
        cond_plus(sys, &f, v)
    };
    match (with(1), with(-1)) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    }
}

#[test]
fn influence_entries_match_raw_weights() {
    for g in connected_graphs_up_to(4).unwrap() {
        for (b, gm, l) in [(0.0, 1.0, 1.3), (0.4, 1.2, 0.6)] {
            let sys = TwoSpinSystem::new(g.clone(), b, gm, l).unwrap();
            let table = GibbsTable::enumerate(&sys).unwrap();
            let n = g.n();
            for (dom, plus) in all_pinnings((1 << n) - 1) {
                let pin = Pinning::from_masks(dom, plus, n);
                let Ok(m) = influence_matrix(&table, &pin, Flavor::Signed) else { continue };
                let pairs: Vec<(usize, i8)> = pin.domain().iter().copied().zip(pin.values().iter().copied()).collect();
                for &u in &m.index {
                    for &v in &m.index {
                        let want = if u == v { 0.0 } else { oracle_influence(&sys, &pairs, u, v) };
                        assert!((m.get(u, v).unwrap() - want).abs() < 1e-12, "{g:?} pin={pin:?} u={u} v={v}");
                    }
                }
            }
        }
    }
}

#[test]
fn edge_hardcore_radius_closed_form() {
    for l in [0.3, 1.0, 4.0] {
        let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::path(2).unwrap(), l).unwrap()).unwrap();
        let sweep = max_rho_over_pinnings(&table).unwrap();
        assert!((sweep.eta - l / (1.0 + l)).abs() < 1e-12);
        assert!(sweep.witness.is_empty());
    }
}

#[test]
fn product_measure_has_zero_radius() {
    let sys = TwoSpinSystem::new(Graph::complete(4).unwrap(), 1.0, 1.0, 0.7).unwrap();
    let sweep = max_rho_over_pinnings(&GibbsTable::enumerate(&sys).unwrap()).unwrap();
    assert!(sweep.eta < 1e-12);
}

#[test]
fn hardcore_field_is_fugacity_scaling() {
    // A uniform field θ on hardcore at λ is hardcore at θλ.
    for g in connected_graphs_up_to(4).unwrap() {
        let base = GibbsTable::enumerate(&TwoSpinSystem::hardcore(g.clone(), 1.5).unwrap()).unwrap();
        for theta in [0.2, 0.5, 0.9] {
            let scaled = GibbsTable::enumerate(&TwoSpinSystem::hardcore(g.clone(), 1.5 * theta).unwrap()).unwrap();
            let rew = base.reweight(&vec![theta; g.n()]).unwrap();
            assert!(rew.max_abs_diff(&scaled) < 1e-14);
            let a = max_rho_over_pinnings(&rew).unwrap().eta;
            let b = max_rho_over_pinnings(&scaled).unwrap().eta;
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn grid_estimate_dominates_unit_field() {
    let sys = TwoSpinSystem::new(Graph::cycle(4).unwrap(), 0.3, 1.0, 1.0).unwrap();
    let table = GibbsTable::enumerate(&sys).unwrap();
    let base = max_rho_over_pinnings(&table).unwrap().eta;
    let est = complete_si_estimate(&sys, &SiGrid::default()).unwrap();
    assert!(est.eta_hat >= base - 1e-12);
    assert_eq!(est.points.len(), 70);
}

#[test]
fn good_direction_hardcore_is_all_plus() {
    let sys = TwoSpinSystem::hardcore(Graph::star(3).unwrap(), 5.0).unwrap();
    assert_eq!(good_direction(&sys), DirectionVector::ones(4));
}

proptest! {
    #[test]
    fn flipping_preserves_absolute_radius(
        b in 0.0f64..0.9, l in 0.1f64..3.0,
        flips in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 4),
    ) {
        let sys = TwoSpinSystem::new(Graph::cycle(4).unwrap(), b, 1.0, l).unwrap();
        let table = GibbsTable::enumerate(&sys).unwrap();
        let flipped = table.flip(&DirectionVector::new(flips).unwrap()).unwrap();
        let a = influence_matrix(&table, &Pinning::empty(), Flavor::Absolute).unwrap().spectral_radius();
        let c = influence_matrix(&flipped, &Pinning::empty(), Flavor::Absolute).unwrap().spectral_radius();
        prop_assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_bounded_by_row_sums(b in 0.0f64..0.9, g in 0.9f64..1.5, l in 0.1f64..3.0) {
        let sys = TwoSpinSystem::new(Graph::complete(4).unwrap(), b, g, l).unwrap();
        let m = influence_matrix(&GibbsTable::enumerate(&sys).unwrap(), &Pinning::empty(), Flavor::Absolute).unwrap();
        let max_row = m.entries.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
        prop_assert!(m.spectral_radius() <= max_row + 1e-10);
    }
}
