//! Exhaustive small-instance checks. Each criterion sweeps graphs and
//! parameters, compares exact quantities with the stated bound, and
//! reports the smallest slack it saw.

use crate::coupling::{coupling_gap_bridge, path_coupling_certificate, WeightedHamming};
use crate::dynamics::hypergeo::HyperGeoParams;
use crate::dynamics::ktransform::k_transform_table;
use crate::dynamics::{visit_counts, DynamicsKind, DynamicsSpec};
use crate::error::{param, Result};
use crate::exact::{
    detailed_balance_residual, exact_mixing_time, field_dirichlet_identity_check, glauber_gap, glauber_matrix,
    min_gap, mixing_time_bound, spectral_report, transition_matrix, GlauberPick,
};
use crate::gibbs::GibbsTable;
use crate::graph::{connected_graphs_up_to, Graph};
use crate::model::{all_pinnings, Configuration, FieldVector, TwoSpinSystem};
use crate::si::{complete_si_table, good_direction, max_rho_over_pinnings, SiGrid};
use crate::tree::{boundedness_certificate, contraction_certificate, saw_tree, tree_total_influence_table, PotentialSpec};
use crate::uniqueness::{decay, fixed_point, lambda_c, solved_gap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

/// Antiferromagnetic `(β, γ, λ)` points shared by the chain sweeps.
pub const PARAM_GRID: [(f64, f64, f64); 12] = [
    (0.0, 1.0, 0.5),
    (0.0, 1.0, 1.0),
    (0.0, 1.0, 2.0),
    (0.0, 1.5, 1.0),
    (0.0, 0.8, 0.7),
    (0.2, 1.0, 1.0),
    (0.5, 1.0, 0.8),
    (0.3, 2.0, 1.5),
    (0.5, 0.5, 1.0),
    (0.7, 0.7, 0.6),
    (0.1, 0.5, 3.0),
    (0.4, 1.8, 0.4),
];

pub const THETAS: [f64; 3] = [0.2, 0.5, 0.8];

/// Regression ceiling for `‖𝓜_{64,64} − P_FD‖∞` on edge hardcore λ=1, θ=1/2.
pub const LIMIT_THRESHOLD: f64 = 1.0e-3;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct VerifyOptions {
    /// Caps the graph size of every sweep.
    pub nmax: Option<usize>,
    /// Replaces one golden value by a wrong one (negative control).
    pub corrupt_oracle: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub failures: usize,
    /// Smallest slack `bound − value` over all checks.
    pub worst_margin: f64,
    pub detail: String,
    pub examples: Vec<String>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    checked: usize,
    failures: usize,
    worst: f64,
    examples: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { worst: f64::INFINITY, ..Default::default() }
    }

    /// Records one check; it passes when `margin >= 0`.
    fn check(&mut self, margin: f64, ctx: impl FnOnce() -> String) {
        self.checked += 1;
        if margin.is_nan() || margin < 0.0 {
            self.failures += 1;
            if self.examples.len() < 5 {
                self.examples.push(format!("{} (margin {margin:.3e})", ctx()));
            }
        }
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
        }
    }

    fn fail(&mut self, ctx: String) {
        self.checked += 1;
        self.failures += 1;
        if self.examples.len() < 5 {
            self.examples.push(ctx);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures += other.failures;
        if other.worst < self.worst || other.worst.is_nan() {
            self.worst = other.worst;
        }
        for e in other.examples {
            if self.examples.len() < 5 {
                self.examples.push(e);
            }
        }
        self.notes.extend(other.notes);
        self
    }
}

fn fold<I: ParallelIterator<Item = Tally>>(it: I) -> Tally {
    it.reduce(Tally::new, Tally::merge)
}

pub const CRITERIA: [(u8, &str, f64); 14] = [
    (1, "exactness golden values", 1.0),
    (2, "field dynamics reversibility and stationarity", 300.0),
    (3, "field dynamics Dirichlet identity", 120.0),
    (4, "comparison with Glauber", 600.0),
    (5, "projected block converges to field dynamics", 60.0),
    (6, "block dynamics gap bound", 600.0),
    (7, "field dynamics mixing lemma", 600.0),
    (8, "spectral independence ceilings", 600.0),
    (9, "k-transform spectral independence overhead", 300.0),
    (10, "SAW influence preservation", 600.0),
    (11, "potential certificates", 120.0),
    (12, "coupling certificates", 300.0),
    (13, "sampler statistics", 60.0),
    (14, "mixing time bound sanity", 120.0),
];

/// Criterion ids for a suite name (`all`, a group name, or a number).
pub fn suite_ids(name: &str) -> Result<Vec<u8>> {
    let ids: Vec<u8> = match name {
        "all" => (1..=14).collect(),
        "exact" => vec![1],
        "field" => vec![2, 3, 4, 5, 7],
        "block" => vec![6],
        "si" => vec![8, 9],
        "saw" | "tree" => vec![10, 11],
        "coupling" => vec![12],
        "sampler" => vec![13],
        "mixing" => vec![14],
        other => match other.parse::<u8>() {
            Ok(i) if (1..=14).contains(&i) => vec![i],
            _ => return param(format!("unknown suite '{other}'")),
        },
    };
    Ok(ids)
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Vec<CriterionReport>> {
    Ok(suite_ids(name)?.into_iter().map(|id| run_criterion(id, opts)).collect())
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let (_, name, budget) = CRITERIA[(id - 1) as usize];
    let n = |default: usize| opts.nmax.map_or(default, |m| m.min(default)).max(1);
    let res = match id {
        1 => c1_exactness(opts.corrupt_oracle),
        2 => c2_field_reversible(n(5)),
        3 => c3_dirichlet(n(4)),
        4 => c4_comparison(n(5)),
        5 => c5_limit(),
        6 => c6_block(n(5)),
        7 => c7_mixing_lemma(n(5)),
        8 => c8_si_ceilings(n(5)),
        9 => c9_ktransform(n(3)),
        10 => c10_saw(n(6)),
        11 => c11_potential(),
        12 => c12_coupling(n(6)),
        13 => c13_sampler(),
        14 => c14_mixing_time(n(4)),
        _ => unreachable!("criterion ids are 1..=14"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let tally = res.unwrap_or_else(|e| {
        let mut t = Tally::new();
        t.fail(format!("error: {e}"));
        t
    });
    let in_budget = seconds <= budget;
    let mut detail = format!("{} checks, {} failures, worst margin {:.3e}", tally.checked, tally.failures, tally.worst);
    for note in &tally.notes {
        detail.push_str("; ");
        detail.push_str(note);
    }
    if !in_budget {
        detail.push_str(&format!("; over time budget ({seconds:.1}s > {budget}s)"));
    }
    CriterionReport {
        id,
        name,
        pass: tally.failures == 0 && tally.checked > 0 && in_budget,
        checked: tally.checked,
        failures: tally.failures,
        worst_margin: tally.worst,
        detail,
        examples: tally.examples,
        seconds,
        budget_seconds: budget,
    }
}

fn systems(nmax: usize) -> Result<Vec<TwoSpinSystem>> {
    let mut out = Vec::new();
    for g in connected_graphs_up_to(nmax)? {
        for &(b, gm, l) in &PARAM_GRID {
            out.push(TwoSpinSystem::new(g.clone(), b, gm, l)?);
        }
    }
    Ok(out)
}

fn label(s: &TwoSpinSystem) -> String {
    format!(
        "n={} edges={:?} beta={} gamma={} lambda={:?}",
        s.n(),
        s.graph().edges(),
        s.beta(),
        s.gamma(),
        s.uniform_lambda().map_or_else(|| format!("{:?}", s.fields()), |l| l.to_string())
    )
}

fn c1_exactness(corrupt: bool) -> Result<Tally> {
    let mut t = Tally::new();
    let want3 = if corrupt { 4.5 } else { 4.0 };
    let l3 = lambda_c(3)?;
    t.check(if l3 == want3 { 0.0 } else { -(l3 - want3).abs() }, || format!("lambda_c(3) = {l3}, expected {want3}"));
    let l4 = lambda_c(4)?;
    t.check(if l4 == 1.6875 { 0.0 } else { -(l4 - 1.6875).abs() }, || format!("lambda_c(4) = {l4}"));
    let x = fixed_point(0.0, 1.0, 4.0, 2)?;
    t.check(1e-10 - (x - 1.0).abs(), || format!("fixed point {x}"));
    let f = decay(0.0, 1.0, 2, x);
    t.check(1e-10 - (f - 1.0).abs(), || format!("decay at fixed point {f}"));
    let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::path(2)?, 1.0)?)?;
    let g = glauber_gap(&table, GlauberPick::Free)?;
    t.check(1e-10 - (g - 0.25).abs(), || format!("edge hardcore Glauber gap {g}"));
    Ok(t)
}

fn c2_field_reversible(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().map(|s| {
        let mut t = Tally::new();
        let table = match GibbsTable::enumerate(s) {
            Ok(x) => x,
            Err(e) => {
                t.fail(format!("{}: {e}", label(s)));
                return t;
            }
        };
        for &theta in &THETAS {
            match transition_matrix(&DynamicsKind::Field { theta }, &table) {
                Ok(p) => {
                    let r = detailed_balance_residual(&p).max(p.stationarity_residual());
                    t.check(1e-10 - r, || format!("{} theta={theta}", label(s)));
                }
                Err(e) => t.fail(format!("{} theta={theta}: {e}", label(s))),
            }
        }
        t
    })))
}

fn c3_dirichlet(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().enumerate().map(|(i, s)| {
        let mut t = Tally::new();
        let table = GibbsTable::enumerate(s).expect("valid system");
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for &theta in &THETAS {
            for _ in 0..20 {
                let f: Vec<f64> = (0..table.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                match field_dirichlet_identity_check(&table, theta, &f) {
                    Ok(c) => t.check(1e-9 - c.residual, || format!("{} theta={theta}", label(s))),
                    Err(e) => t.fail(format!("{}: {e}", label(s))),
                }
            }
        }
        t
    })))
}

fn c4_comparison(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().map(|s| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            let gd = glauber_gap(&table, GlauberPick::Free)?;
            for &theta in &THETAS {
                let fd = spectral_report(&transition_matrix(&DynamicsKind::Field { theta }, &table)?)?.gap;
                let mg = min_gap(&table.reweight(&vec![theta; s.n()])?, GlauberPick::Free)?.value;
                t.check(gd - fd * mg + 1e-9, || format!("{} theta={theta}: gd={gd} fd={fd} mg={mg}", label(s)));
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{}: {e}", label(s)));
        }
        t
    })))
}

/// `‖𝓜_{k,⌈θkn⌉} − P_FD‖∞` for edge hardcore with λ = 1 and θ = 1/2.
pub fn limit_distance(k: usize) -> Result<f64> {
    let table = GibbsTable::enumerate(&TwoSpinSystem::hardcore(Graph::path(2)?, 1.0)?)?;
    Ok(limit_distance_for(&table, 0.5, k)?.1)
}

/// `(ℓ, ‖𝓜_{k,ℓ} − P_FD‖∞)` with `ℓ = ⌈θkn⌉`, `n` the free vertices of `table`.
pub fn limit_distance_for(table: &GibbsTable, theta: f64, k: usize) -> Result<(usize, f64)> {
    let n = table.free_vertices().len();
    let ell = ((theta * (k * n) as f64).ceil() as usize).max(1);
    let m = transition_matrix(&DynamicsKind::ProjectedBlock { k, ell }, table)?;
    let fd = transition_matrix(&DynamicsKind::Field { theta }, table)?;
    Ok((ell, (&m.p - &fd.p).abs().max()))
}

fn c5_limit() -> Result<Tally> {
    let mut t = Tally::new();
    let d2 = limit_distance(2)?;
    let d64 = limit_distance(64)?;
    t.check(d2 - d64, || format!("k=64 distance {d64} not below k=2 distance {d2}"));
    t.check(LIMIT_THRESHOLD - d64, || format!("k=64 distance {d64} above {LIMIT_THRESHOLD}"));
    t.notes.push(format!("d(2)={d2:.6e}, d(64)={d64:.6e}"));
    Ok(t)
}

/// `max(1, ⌈η⌉)`, rounding values within 1e−9 of an integer down.
pub fn eta_ceiling(eta: f64) -> usize {
    ((eta - 1e-9).ceil().max(1.0)) as usize
}

fn c6_block(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().map(|s| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            let eta = max_rho_over_pinnings(&table)?.eta;
            let e = eta_ceiling(eta);
            let n = s.n();
            for ell in 2 * e..=n {
                let gap = spectral_report(&transition_matrix(&DynamicsKind::Block { ell }, &table)?)?.gap;
                let bound = (ell as f64 / (2 * n) as f64).powi(2 * e as i32 + 1);
                t.check(gap - bound + 1e-9, || format!("{} ell={ell} eta={eta}: gap={gap} bound={bound}", label(s)));
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{}: {e}", label(s)));
        }
        t
    })))
}

fn c7_mixing_lemma(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().map(|s| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            let mut eta = complete_si_table(&table, &SiGrid::default())?.0.eta_hat;
            let mut refined = false;
            for &theta in &THETAS {
                let fd = spectral_report(&transition_matrix(&DynamicsKind::Field { theta }, &table)?)?.gap;
                let mut bound = (theta / 2.0).powf(2.0 * eta + 7.0);
                if fd < bound && !refined {
                    let grid = SiGrid { random_vectors: 500, seed: 7, ..SiGrid::default() };
                    eta = eta.max(complete_si_table(&table, &grid)?.0.eta_hat);
                    refined = true;
                    bound = (theta / 2.0).powf(2.0 * eta + 7.0);
                }
                t.check(fd - bound, || format!("{} theta={theta}: gap={fd} bound={bound} eta={eta}", label(s)));
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{}: {e}", label(s)));
        }
        t
    })))
}

/// Ising edge-activity interval `[(Δ−2+δ)/(Δ−δ), (Δ−δ)/(Δ−2+δ)]`.
pub fn ising_interval(delta_max: usize, delta: f64) -> (f64, f64) {
    let d = delta_max as f64;
    ((d - 2.0 + delta) / (d - delta), (d - delta) / (d - 2.0 + delta))
}

fn c8_si_ceilings(nmax: usize) -> Result<Tally> {
    let mut cases: Vec<(TwoSpinSystem, f64)> = Vec::new();
    for g in connected_graphs_up_to(nmax)? {
        let big = g.max_degree().max(3);
        for lam in [0.3, 0.6, 1.0, 1.5] {
            let delta = solved_gap(0.0, 1.0, lam, big)?;
            if delta > 1e-6 {
                cases.push((TwoSpinSystem::hardcore(g.clone(), lam)?, 144.0 / delta));
            }
        }
        for delta in [0.25, 0.5] {
            let (lo, hi) = ising_interval(big, delta);
            for beta in [lo, (lo * hi).sqrt(), hi] {
                for lam in [0.5, 1.0] {
                    cases.push((TwoSpinSystem::ising(g.clone(), beta, lam)?, 4.0 / delta));
                }
            }
        }
    }
    Ok(fold(cases.par_iter().map(|(s, ceiling)| {
        let mut t = Tally::new();
        match GibbsTable::enumerate(s).and_then(|tb| complete_si_table(&tb, &SiGrid::default())) {
            Ok((est, _)) => t.check(ceiling - est.eta_hat, || format!("{}: eta={} ceiling={ceiling}", label(s), est.eta_hat)),
            Err(e) => t.fail(format!("{}: {e}", label(s))),
        }
        t
    })))
}

/// All vectors of `{1/k, 2/k, …, 1}^n`.
pub fn lattice_fields(n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=k).map(move |j| {
                    let mut w = v.clone();
                    w.push(j as f64 / k as f64);
                    w
                })
            })
            .collect();
    }
    out
}

fn c9_ktransform(nmax: usize) -> Result<Tally> {
    let mut cases = Vec::new();
    for s in systems(nmax.min(3))? {
        for k in [2, 3] {
            cases.push((s.clone(), k));
        }
    }
    Ok(fold(cases.par_iter().map(|(s, k)| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            let grid = SiGrid { extra: lattice_fields(s.n(), *k), ..SiGrid::default() };
            let eta = complete_si_table(&table, &grid)?.0.eta_hat;
            let lifted = k_transform_table(&table, *k)?;
            let rho = max_rho_over_pinnings(&lifted)?.eta;
            t.check(eta + 2.0 + 1e-9 - rho, || format!("{} k={k}: rho={rho} eta={eta}", label(s)));
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{} k={k}: {e}", label(s)));
        }
        t
    })))
}

fn c10_saw(nmax: usize) -> Result<Tally> {
    let mut cases = Vec::new();
    for g in connected_graphs_up_to(nmax)? {
        for lam in [0.5, 1.0] {
            for r in 0..g.n() {
                cases.push((TwoSpinSystem::hardcore(g.clone(), lam)?, r));
            }
        }
    }
    Ok(fold(cases.par_iter().map(|(s, r)| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            let saw = saw_tree(s.graph(), *r, None)?;
            let free = table.full_mask() & !(1 << r);
            for (dom, plus) in all_pinnings(free) {
                if !table.is_feasible_masks(dom, plus) {
                    continue;
                }
                let rep = tree_total_influence_table(&saw, s, &table, dom, plus)?;
                t.check(1e-9 - rep.max_residual, || format!("{} root={r} pin=({dom:b},{plus:b})", label(s)));
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{} root={r}: {e}", label(s)));
        }
        t
    })))
}

/// Deterministic sample of up-to-Δ unique `(β, γ, λ, Δ, δ)` points.
pub fn unique_sweep(points: usize, seed: u64) -> Result<Vec<(f64, f64, f64, usize, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(points);
    while out.len() < points {
        let big = rng.gen_range(3..=6usize);
        let (b, g) = if out.len() % 3 == 0 {
            (0.0, rng.gen_range(0.5..2.0))
        } else {
            let b: f64 = rng.gen_range(0.05..0.95);
            let g = rng.gen_range(b..(0.95 / b).min(3.0).max(b + 1e-3));
            (b, g)
        };
        if b * g >= 1.0 {
            continue;
        }
        let lam = 10f64.powf(rng.gen_range(-2.0..1.0));
        let delta = solved_gap(b, g, lam, big)?;
        if delta >= 1e-3 {
            out.push((b, g, lam, big, delta));
        }
    }
    Ok(out)
}

fn c11_potential() -> Result<Tally> {
    let pts = unique_sweep(100, 11)?;
    Ok(fold(pts.par_iter().enumerate().map(|(i, &(b, g, lam, big, delta))| {
        let mut t = Tally::new();
        let ctx = || format!("beta={b} gamma={g} lambda={lam} Delta={big} delta={delta}");
        let run = |t: &mut Tally| -> Result<()> {
            let spec = PotentialSpec::sqrt_abs_h(b, g)?;
            for d in 1..big {
                let c = contraction_certificate(&spec, lam, d, delta, i as u64)?;
                t.check(c.bound + 1e-9 - c.alpha_hat.max(c.asym_max), || format!("{} d={d}: contraction {}", ctx(), c.alpha_hat));
            }
            for d1 in 0..big {
                for d2 in 0..big {
                    let c = boundedness_certificate(&spec, lam, d1, d2, 36.0)?;
                    t.check(c.bound + 1e-9 - c.max_product, || format!("{} d1={d1} d2={d2}: {}", ctx(), c.max_product));
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{}: {e}", ctx()));
        }
        t
    })))
}

/// Up-to-Δ unique system magnetized by `θ = δ²/64` along the good direction.
pub fn magnetized_good_direction(base: &TwoSpinSystem, delta: f64) -> Result<TwoSpinSystem> {
    let theta = delta * delta / 64.0;
    let chi = good_direction(base);
    let phi: Vec<f64> = chi.as_slice().iter().map(|&c| theta.powi(c as i32)).collect();
    base.magnetize(&FieldVector::new(phi)?)
}

fn c12_coupling(nmax: usize) -> Result<Tally> {
    // (system, metric, required rate)
    let mut cases: Vec<(TwoSpinSystem, WeightedHamming, f64, &'static str)> = Vec::new();
    for g in connected_graphs_up_to(nmax)? {
        let n = g.n();
        let big = g.max_degree().max(1);
        for lam in [1.0 / (2.0 * big as f64), 1.0 / (4.0 * big as f64)] {
            cases.push((TwoSpinSystem::hardcore(g.clone(), lam)?, WeightedHamming::unit(n), 1.0 / (2 * n) as f64, "hardcore"));
        }
        if g.max_degree() >= 3 {
            for &(b, gm, l) in &PARAM_GRID {
                if b * gm >= 1.0 {
                    continue;
                }
                let delta = solved_gap(b, gm, l, g.max_degree())?;
                if delta <= 1e-6 {
                    continue;
                }
                let base = TwoSpinSystem::new(g.clone(), b, gm, l)?;
                let sys = magnetized_good_direction(&base, delta)?;
                let metric = WeightedHamming::degree_weighted(&sys, delta)?;
                cases.push((sys, metric, delta / (8 * n) as f64, "magnetized"));
            }
        }
    }
    let mut t = fold(cases.par_iter().map(|(s, metric, need, kind)| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let cert = path_coupling_certificate(s, metric)?;
            let slack = if *kind == "hardcore" { 1e-12 } else { 1e-9 };
            t.check(cert.r - need + slack, || format!("{kind} {}: r={} need={need}", label(s), cert.r));
            if cert.pass {
                let table = GibbsTable::enumerate(s)?;
                let p = glauber_matrix(&table, GlauberPick::All)?;
                let b = coupling_gap_bridge(&cert, &p)?;
                t.check(b.gap - b.r + 1e-9, || format!("bridge {kind} {}: gap={} r={}", label(s), b.gap, b.r));
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{kind} {}: {e}", label(s)));
        }
        t
    }));
    t.notes.push(format!("{} instances", cases.len()));
    Ok(t)
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

fn c13_sampler() -> Result<Tally> {
    let mut t = Tally::new();
    let sys = TwoSpinSystem::hardcore(Graph::path(2)?, 1.0)?;
    let table = GibbsTable::enumerate(&sys)?;
    let steps = 1_000_000u64;
    for (kind, seed) in [(DynamicsKind::Glauber, 13), (DynamicsKind::Field { theta: 0.5 }, 14)] {
        let spec = DynamicsSpec::new(kind, sys.clone());
        let counts = visit_counts(&spec, Configuration::all_minus(2), steps, seed)?;
        let emp: Vec<f64> = table.states().iter().map(|&m| counts[m as usize] as f64 / steps as f64).collect();
        let d = tv(&emp, table.probs());
        t.check(0.01 - d, || format!("{kind:?}: TV {d}"));
        t.notes.push(format!("{kind:?} TV={d:.2e}"));
    }
    let hg = HyperGeoParams::new(3, 3, 4)?;
    let support = hg.support();
    let mut counts = vec![0u64; support.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..steps {
        let a = hg.sample(&mut rng);
        let i = support.iter().position(|s| *s == a).expect("sample in support");
        counts[i] += 1;
    }
    let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
    let exact: Vec<f64> = support.iter().map(|a| hg.pmf(a)).collect();
    let d = tv(&emp, &exact);
    t.check(0.01 - d, || format!("hypergeometric TV {d}"));
    t.notes.push(format!("hypergeometric TV={d:.2e}"));
    Ok(t)
}

fn c14_mixing_time(nmax: usize) -> Result<Tally> {
    let sys = systems(nmax)?;
    Ok(fold(sys.par_iter().map(|s| {
        let mut t = Tally::new();
        let run = |t: &mut Tally| -> Result<()> {
            let table = GibbsTable::enumerate(s)?;
            for kind in [DynamicsKind::Glauber, DynamicsKind::Field { theta: 0.5 }] {
                let p = transition_matrix(&kind, &table)?;
                let rep = spectral_report(&p)?;
                for eps in [0.1, 0.01] {
                    let bound = mixing_time_bound(rep.abs_gap, table.mu_min(), eps)?;
                    let tmax = bound.floor() as usize;
                    match exact_mixing_time(&p, eps, tmax) {
                        Some(tm) => t.check(bound - tm as f64, || format!("{} {kind:?} eps={eps}", label(s))),
                        None => t.fail(format!("{} {kind:?} eps={eps}: not mixed by bound {bound}", label(s))),
                    }
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut t) {
            t.fail(format!("{}: {e}", label(s)));
        }
        t
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_resolve() {
        assert_eq!(suite_ids("all").unwrap().len(), 14);
        assert_eq!(suite_ids("7").unwrap(), vec![7]);
        assert!(suite_ids("nope").is_err());
    }

    #[test]
    fn corrupted_oracle_fails() {
        let opts = VerifyOptions { nmax: Some(2), corrupt_oracle: true };
        assert!(!run_criterion(1, &opts).pass);
        assert!(run_criterion(1, &VerifyOptions::default()).pass);
    }

    #[test]
    fn lattice_has_k_to_the_n_points() {
        assert_eq!(lattice_fields(3, 2).len(), 8);
        assert!(lattice_fields(2, 3).iter().all(|v| v.iter().all(|&x| x > 0.0 && x <= 1.0)));
    }
}
