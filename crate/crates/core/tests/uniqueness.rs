use proptest::prelude::*;
use spinlab::uniqueness::*;

/// Solves `u = log F(e^u)` by fixed steps `u −= G(u)/(d+1)`. `G(u) = u − log F(e^u)`
/// has slope in `[1, d+1)`, so the step contracts without any knowledge of the root.
fn descend_fixed_point(beta: f64, gamma: f64, lambda: f64, d: usize) -> f64 {
    let log_f = |u: f64| {
        let x = u.exp();
        lambda.ln() + d as f64 * ((beta * x + 1.0).ln() - (x + gamma).ln())
    };
    let mut u = lambda.ln();
    for _ in 0..100_000 {
        let step = (u - log_f(u)) / (d as f64 + 1.0);
        u -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    u.exp()
}

#[test]
fn critical_fugacity_closed_form() {
    for delta in 3..12usize {
        let d = delta as f64;
        let want = (d - 1.0).powf(d - 1.0) / (d - 2.0).powf(d);
        let got = lambda_c(delta).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "delta={delta}");
    }
    assert!(lambda_c(2).is_err());
}

#[test]
fn hardcore_decay_is_one_at_the_threshold() {
    for d in 2..10usize {
        let lc = lambda_c(d + 1).unwrap();
        let v = decay_at_fixed_point(0.0, 1.0, lc, d).unwrap();
        assert!((v.f - 1.0).abs() < 1e-9, "d={d}: {}", v.f);
        // f = d·x/(1+x) for hardcore.
        assert!((v.f - d as f64 * v.x_hat / (1.0 + v.x_hat)).abs() < 1e-12);
    }
}

#[test]
fn hardcore_up_to_delta_boundary() {
    for big in [3usize, 4, 6] {
        let lc = lambda_c(big).unwrap();
        let below = uniqueness_check(&UniquenessQuery::new(0.0, 1.0, 0.99 * lc, 0.0).unwrap(), UniquenessMode::UpTo(big)).unwrap();
        let above = uniqueness_check(&UniquenessQuery::new(0.0, 1.0, 1.01 * lc, 0.0).unwrap(), UniquenessMode::UpTo(big)).unwrap();
        assert!(below.pass && !above.pass, "Delta={big}");
        assert_eq!(below.degrees.len(), big - 1);
    }
}

#[test]
fn solved_gap_matches_max_decay() {
    let (b, g, l) = (0.3, 1.4, 0.9);
    let worst = (1..5).map(|d| decay_at_fixed_point(b, g, l, d).unwrap().f).fold(0.0, f64::max);
    assert!((solved_gap(b, g, l, 5).unwrap() - (1.0 - worst)).abs() < 1e-12);
}

#[test]
fn ferromagnetic_parameters_are_rejected() {
    assert!(UniquenessQuery::new(1.2, 1.0, 1.0, 0.0).is_err());
    assert!(UniquenessQuery::new(0.5, 0.5, -1.0, 0.0).is_err());
}

#[test]
fn infinite_mode_agrees_with_large_finite_range() {
    let q = UniquenessQuery::new(0.5, 1.0, 1.0, 0.0).unwrap();
    let inf = uniqueness_check(&q, UniquenessMode::UpToInfinity).unwrap();
    let fin = uniqueness_check(&q, UniquenessMode::UpTo(200)).unwrap();
    assert_eq!(inf.pass, fin.pass);
    assert!(inf.heuristic || inf.degrees.len() < 200);
}

#[test]
fn flip_invariance_on_samples() {
    for (b, g, l) in [(0.0, 1.0, 1.0), (0.3, 1.2, 2.0), (0.5, 0.5, 0.3)] {
        let q = UniquenessQuery::new(b, g, l, 0.0).unwrap();
        for d in 1..6 {
            match flip_invariance_check(&q, d, &[0.2, 0.5, 0.8]) {
                Ok(ok) => assert!(ok, "{b} {g} {l} d={d}"),
                Err(spinlab::Error::Precondition(_)) => {
                    assert!(!uniqueness_check(&q, UniquenessMode::SingleD(d)).unwrap().pass)
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
}

proptest! {
    #[test]
    fn fixed_point_matches_descent(b in 0.0f64..0.95, g in 0.5f64..1.05, l in 0.05f64..5.0, d in 1usize..8) {
        prop_assume!(b <= g && b * g < 1.0);
        let x = fixed_point(b, g, l, d).unwrap();
        let y = descend_fixed_point(b, g, l, d);
        prop_assert!((x - y).abs() < 1e-8 * x.max(1.0), "x={x} y={y}");
        prop_assert!((tree_map(b, g, l, d, x) - x).abs() < 1e-10 * x.max(1.0));
    }

    #[test]
    fn hardcore_decay_increases_with_fugacity(l in 0.05f64..10.0, d in 1usize..10) {
        let a = decay_at_fixed_point(0.0, 1.0, l, d).unwrap().f;
        let b = decay_at_fixed_point(0.0, 1.0, 1.1 * l, d).unwrap().f;
        prop_assert!(b > a);
    }

    #[test]
    fn numeric_and_closed_form_decay_agree(b in 0.0f64..0.6, g in 0.6f64..1.1, l in 0.1f64..4.0, d in 1usize..6) {
        let v = decay_at_fixed_point(b, g, l, d).unwrap();
        prop_assert!((v.f - v.f_numeric).abs() < 1e-5 * v.f.max(1.0));
    }
}
