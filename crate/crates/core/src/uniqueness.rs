//! Tree recursion and uniqueness with gap δ.
//!
//! ```text
//! F_d(x) = λ ((βx + 1)/(x + γ))^d
//! f_d(x) = d (1 − βγ) x / ((βx + 1)(x + γ))      (= |F_d'(x)| at a fixed point)
//! ```
//!
//! `(β, γ, λ)` is d-unique with gap δ when `f_d(x̂_d) ≤ 1 − δ` at the unique
//! positive fixed point `x̂_d` of `F_d`, and up-to-Δ unique when this
//! holds for every `1 ≤ d < Δ`.

use crate::error::{param, Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessQuery {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl UniquenessQuery {
    pub fn new(beta: f64, gamma: f64, lambda: f64, delta: f64) -> Result<Self> {
        let q = Self { beta, gamma, lambda, delta };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        validate_regime(self.beta, self.gamma, self.lambda)?;
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return param("delta must lie in [0,1)");
        }
        Ok(())
    }
}

fn validate_regime(beta: f64, gamma: f64, lambda: f64) -> Result<()> {
    if !(gamma > 0.0) || !(beta >= 0.0) || beta > gamma {
        return param("need 0 <= beta <= gamma and gamma > 0");
    }
    if !(beta * gamma < 1.0) {
        return param("uniqueness analysis needs beta*gamma < 1");
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return param("lambda must be positive and finite");
    }
    Ok(())
}

pub fn tree_map(beta: f64, gamma: f64, lambda: f64, d: usize, x: f64) -> f64 {
    lambda * ((beta * x + 1.0) / (x + gamma)).powi(d as i32)
}

pub fn decay(beta: f64, gamma: f64, d: usize, x: f64) -> f64 {
    d as f64 * (1.0 - beta * gamma) * x / ((beta * x + 1.0) * (x + gamma))
}

/// Unique positive fixed point of `F_d` by bisection on `x − F_d(x)`,
/// bracketed by the image interval of `F_d`.
pub fn fixed_point(beta: f64, gamma: f64, lambda: f64, d: usize) -> Result<f64> {
    validate_regime(beta, gamma, lambda)?;
    if d == 0 {
        return param("degree must be at least 1");
    }
    let a = lambda * beta.powi(d as i32);
    let b = lambda / gamma.powi(d as i32);
    let mut lo = a.min(b) * (1.0 - 1e-9);
    let mut hi = a.max(b) * (1.0 + 1e-9);
    let g = |x: f64| x - tree_map(beta, gamma, lambda, d, x);
    debug_assert!(g(lo) <= 0.0 && g(hi) >= 0.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint with the smaller residual.
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayValue {
    pub x_hat: f64,
    pub f: f64,
    /// Centered finite difference of `F_d` at `x̂`.
    pub f_numeric: f64,
}

pub fn decay_at_fixed_point(beta: f64, gamma: f64, lambda: f64, d: usize) -> Result<DecayValue> {
    let x = fixed_point(beta, gamma, lambda, d)?;
    let h = 1e-6 * x.max(1e-12);
    let num = (tree_map(beta, gamma, lambda, d, x + h) - tree_map(beta, gamma, lambda, d, x - h)).abs() / (2.0 * h);
    Ok(DecayValue { x_hat: x, f: decay(beta, gamma, d, x), f_numeric: num })
}

/// `λ_c(Δ) = (Δ−1)^{Δ−1} / (Δ−2)^Δ`.
pub fn lambda_c(delta_max: usize) -> Result<f64> {
    if delta_max < 3 {
        return param("lambda_c needs Delta >= 3");
    }
    let d = delta_max as f64;
    Ok((d - 1.0).powi(delta_max as i32 - 1) / (d - 2.0).powi(delta_max as i32))
}

/// Hardcore-type threshold `λ_{c,δ}(d) = (1−δ) d^d γ^{d+1} / (d−1+δ)^{d+1}`
/// for β = 0.
pub fn hardcore_threshold(gamma: f64, delta: f64, d: usize) -> f64 {
    let df = d as f64;
    let di = d as i32;
    (1.0 - delta) * df.powi(di) * gamma.powi(di + 1) / (df - 1.0 + delta).powi(di + 1)
}

/// `Δ̄ = (1 + √(βγ)) / (1 − √(βγ))`.
pub fn delta_bar(beta: f64, gamma: f64) -> f64 {
    let s = (beta * gamma).sqrt();
    (1.0 + s) / (1.0 - s)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalRoots {
    pub zeta: f64,
    pub x1: f64,
    pub x2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Roots of `f_d(x) = 1 − δ` and the matching fugacities, for β > 0 and
/// `d ≥ (1−δ)Δ̄`.
pub fn critical_roots(q: &UniquenessQuery, d: usize) -> Option<CriticalRoots> {
    let UniquenessQuery { beta, gamma, delta, .. } = *q;
    if beta <= 0.0 || (d as f64) < (1.0 - delta) * delta_bar(beta, gamma) {
        return None;
    }
    let bg = beta * gamma;
    let zeta = d as f64 * (1.0 - bg) - (1.0 - delta) * (1.0 + bg);
    let disc = (zeta * zeta - 4.0 * (1.0 - delta).powi(2) * bg).max(0.0).sqrt();
    let den = 2.0 * (1.0 - delta) * beta;
    let x1 = (zeta - disc) / den;
    let x2 = (zeta + disc) / den;
    let lam = |x: f64| x * ((x + gamma) / (beta * x + 1.0)).powi(d as i32);
    Some(CriticalRoots { zeta, x1, x2, lambda1: lam(x1), lambda2: lam(x2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum UniquenessMode {
    SingleD(usize),
    UpTo(usize),
    /// Every d ≥ 1, decided by a heuristic early exit.
    UpToInfinity,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub d: usize,
    pub x_hat: f64,
    pub f: f64,
    pub pass: bool,
    pub roots: Option<CriticalRoots>,
    /// Pass/fail from the root criterion, when β > 0.
    pub root_pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub query: UniquenessQuery,
    pub mode: UniquenessMode,
    pub degrees: Vec<DegreeReport>,
    pub pass: bool,
    pub delta_bar: Option<f64>,
    /// `1 − max_d f_d(x̂_d)` over the degrees examined.
    pub solved_gap: f64,
    /// The infinite-degree verdict came from the early-exit heuristic.
    pub heuristic: bool,
    /// Degrees where the fixed-point and root criteria disagree.
    pub criteria_disagreements: usize,
}

fn degree_report(q: &UniquenessQuery, d: usize) -> Result<DegreeReport> {
    let x = fixed_point(q.beta, q.gamma, q.lambda, d)?;
    let f = decay(q.beta, q.gamma, d, x);
    let pass = f <= 1.0 - q.delta + 1e-12;
    let roots = critical_roots(q, d);
    let root_pass = if q.beta > 0.0 {
        Some(match roots {
            None => true,
            Some(r) => q.lambda <= r.lambda1 * (1.0 + 1e-9) || q.lambda >= r.lambda2 * (1.0 - 1e-9),
        })
    } else {
        None
    };
    Ok(DegreeReport { d, x_hat: x, f, pass, roots, root_pass })
}

/// Cap on degrees examined in infinite mode.
pub const INFINITE_D_CAP: usize = 100_000;

pub fn uniqueness_check(q: &UniquenessQuery, mode: UniquenessMode) -> Result<UniquenessReport> {
    q.validate()?;
    let mut degrees = Vec::new();
    let mut heuristic = false;
    match mode {
        UniquenessMode::SingleD(d) => degrees.push(degree_report(q, d)?),
        UniquenessMode::UpTo(big) => {
            if big < 3 {
                return param("up-to-Delta mode needs Delta >= 3");
            }
            for d in 1..big {
                degrees.push(degree_report(q, d)?);
            }
        }
        UniquenessMode::UpToInfinity => {
            heuristic = true;
            let mut decreasing = 0;
            for d in 1..=INFINITE_D_CAP {
                let r = degree_report(q, d)?;
                let prev = degrees.last().map(|p: &DegreeReport| p.f);
                let stop_fail = !r.pass;
                if let Some(pf) = prev {
                    if r.f < pf {
                        decreasing += 1;
                    } else {
                        decreasing = 0;
                    }
                    // Settled: three consecutive decreases past Δ̄ with a
                    // vanishing change, or a decay already below 1e−12.
                    let settled = decreasing >= 3
                        && (d as f64) > delta_bar(q.beta, q.gamma)
                        && ((pf - r.f).abs() < 1e-12 || r.f < 1e-12);
                    degrees.push(r);
                    if stop_fail || settled {
                        break;
                    }
                } else {
                    degrees.push(r);
                    if stop_fail {
                        break;
                    }
                }
            }
        }
    }
    let pass = degrees.iter().all(|r| r.pass);
    let solved_gap = 1.0 - degrees.iter().map(|r| r.f).fold(0.0, f64::max);
    let criteria_disagreements = degrees.iter().filter(|r| r.root_pass.is_some_and(|rp| rp != r.pass)).count();
    Ok(UniquenessReport {
        query: *q,
        mode,
        degrees,
        pass,
        delta_bar: (q.beta > 0.0).then(|| delta_bar(q.beta, q.gamma)),
        solved_gap,
        heuristic,
        criteria_disagreements,
    })
}

/// `1 − max_{1 ≤ d < Δ} f_d(x̂_d)`: the largest δ for which the system is
/// up-to-Δ unique.
pub fn solved_gap(beta: f64, gamma: f64, lambda: f64, delta_max: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in 1..delta_max.max(2) {
        let x = fixed_point(beta, gamma, lambda, d)?;
        worst = worst.max(decay(beta, gamma, d, x));
    }
    Ok(1.0 - worst)
}

/// Checks that magnetizing along the good direction for a degree-(d+1)
/// vertex, `λ' = λ θ^{χ}`, keeps d-uniqueness with gap δ for every θ in
/// `thetas`.
pub fn flip_invariance_check(q: &UniquenessQuery, d: usize, thetas: &[f64]) -> Result<bool> {
    q.validate()?;
    let base = degree_report(q, d)?;
    if !base.pass {
        return Err(Error::Precondition(format!("({}, {}, {}) is not {d}-unique with gap {}", q.beta, q.gamma, q.lambda, q.delta)));
    }
    let chi = if q.beta == 0.0 || q.lambda <= (q.gamma / q.beta).powf((d as f64 + 1.0) / 2.0) { 1 } else { -1 };
    for &t in thetas {
        if !(t > 0.0 && t <= 1.0) {
            return param("theta values must lie in (0,1]");
        }
        let lam = q.lambda * t.powi(chi);
        let x = fixed_point(q.beta, q.gamma, lam, d)?;
        if decay(q.beta, q.gamma, d, x) > 1.0 - q.delta + 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}
