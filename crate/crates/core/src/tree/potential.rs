use super::{h, image_interval, log_recursion, ExtReal};
use crate::error::{param, Result};
use crate::uniqueness::{decay_at_fixed_point, fixed_point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Grid points per maximization.
pub const GRID_POINTS: usize = 2048;
/// Finite stand-in for `±∞` when gridding a half-line.
pub const Y_CLAMP: f64 = 40.0;
/// Random asymmetric probes per contraction certificate.
pub const ASYM_PROBES: usize = 1000;
const TOL: f64 = 1e-9;

#[derive(Clone)]
pub enum Potential {
    /// `φ ≡ 1`.
    Trivial,
    /// `φ(y) = √|h(y)|`.
    SqrtAbsH,
    Custom(Arc<dyn Fn(ExtReal) -> f64 + Send + Sync>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Trivial => f.write_str("Trivial"),
            Potential::SqrtAbsH => f.write_str("SqrtAbsH"),
            Potential::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub beta: f64,
    pub gamma: f64,
    pub potential: Potential,
}

impl PotentialSpec {
    pub fn new(beta: f64, gamma: f64, potential: Potential) -> Result<Self> {
        if !(gamma > 0.0) || !(beta >= 0.0) || beta > gamma || !(beta * gamma <= 1.0) {
            return param("need 0 <= beta <= gamma, gamma > 0 and beta*gamma <= 1");
        }
        Ok(Self { beta, gamma, potential })
    }

    pub fn sqrt_abs_h(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(beta, gamma, Potential::SqrtAbsH)
    }

    pub fn h(&self, y: ExtReal) -> f64 {
        h(self.beta, self.gamma, y)
    }

    pub fn phi(&self, y: ExtReal) -> f64 {
        match &self.potential {
            Potential::Trivial => 1.0,
            Potential::SqrtAbsH => self.h(y).abs().sqrt(),
            Potential::Custom(f) => f(y),
        }
    }

    /// `|h(y)| / φ(y)`, and zero wherever `h(y) = 0`.
    pub fn h_phi(&self, y: ExtReal) -> f64 {
        let a = self.h(y).abs();
        if a == 0.0 {
            return 0.0;
        }
        match &self.potential {
            Potential::Trivial => a,
            Potential::SqrtAbsH => a.sqrt(),
            Potential::Custom(f) => a / f(y),
        }
    }

    /// `φ(H_{λ,d}(y₁,…,y_d)) · Σ h^φ(y_i)`.
    pub fn contraction_value(&self, lambda: f64, ys: &[ExtReal]) -> f64 {
        let top = log_recursion(self.beta, self.gamma, lambda, ys);
        let s: f64 = ys.iter().map(|&y| self.h_phi(y)).sum();
        if s == 0.0 {
            return 0.0;
        }
        self.phi(top) * s
    }

    /// Contraction value at the symmetric point `y₁ = … = y_d = y`.
    pub fn symmetric_value(&self, lambda: f64, d: usize, y: ExtReal) -> f64 {
        self.contraction_value(lambda, &vec![y; d])
    }
}

/// Grid maximization on `[a, b]` followed by golden-section refinement
/// around the best grid point. Returns `(argmax, max)`.
pub fn maximize(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    if a >= b {
        return (a, f(a));
    }
    let step = (b - a) / (GRID_POINTS - 1) as f64;
    let mut best = (a, f(a));
    let mut best_i = 0;
    for i in 1..GRID_POINTS {
        let x = a + step * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    let g = golden_section(&f, lo, hi, 1e-10);
    if g.1 > best.1 {
        g
    } else {
        best
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn clamp_interval(lo: ExtReal, hi: ExtReal) -> (f64, f64) {
    let l = match lo {
        ExtReal::Finite(x) => x,
        ExtReal::NegInf => -Y_CLAMP,
        ExtReal::PosInf => Y_CLAMP,
    };
    let u = match hi {
        ExtReal::Finite(x) => x,
        ExtReal::NegInf => -Y_CLAMP,
        ExtReal::PosInf => Y_CLAMP,
    };
    (l.min(u), u.max(l))
}

/// Maximum of `g` over an extended interval: grid on the finite part plus
/// the exact endpoints.
fn max_over(g: impl Fn(ExtReal) -> f64, lo: ExtReal, hi: ExtReal) -> (ExtReal, f64) {
    let (a, b) = clamp_interval(lo, hi);
    let (x, v) = maximize(|y| g(ExtReal::Finite(y)), a, b);
    let mut best = (ExtReal::Finite(x), v);
    for e in [lo, hi] {
        let ve = g(e);
        if ve > best.1 {
            best = (e, ve);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Pass,
    Fail,
    FailPrecondition,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate {
    pub d: usize,
    pub lambda: f64,
    pub delta: f64,
    /// `f_d(x̂_d)`.
    pub decay: f64,
    pub alpha_hat: f64,
    pub argmax_y: ExtReal,
    /// Largest value seen over random asymmetric tuples.
    pub asym_max: f64,
    /// Whether the asymmetric probes stayed below the symmetric maximum.
    pub symmetrization_ok: bool,
    pub bound: f64,
    pub pass: bool,
    pub status: CertStatus,
    pub label: &'static str,
}

/// Maximizes the contraction value over symmetric tuples and random
/// asymmetric probes; passes when the maximum is at most `√(1−δ)`.
pub fn contraction_certificate(spec: &PotentialSpec, lambda: f64, d: usize, delta: f64, seed: u64) -> Result<ContractionCertificate> {
    if d == 0 {
        return param("contraction needs d >= 1");
    }
    if !(0.0..1.0).contains(&delta) {
        return param("delta must lie in [0,1)");
    }
    let dv = decay_at_fixed_point(spec.beta, spec.gamma, lambda, d)?;
    let precondition = dv.f <= 1.0 - delta + 1e-12;
    let (argmax_y, alpha_hat) = max_over(|y| spec.symmetric_value(lambda, d, y), ExtReal::NegInf, ExtReal::PosInf);
    let centre = match argmax_y {
        ExtReal::Finite(y) => y,
        _ => fixed_point(spec.beta, spec.gamma, lambda, d)?.ln(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut asym_max: f64 = 0.0;
    let mut ys = vec![ExtReal::NegInf; d];
    for k in 0..ASYM_PROBES {
        for y in ys.iter_mut() {
            let u: f64 = rng.gen();
            *y = if u < 0.05 {
                ExtReal::NegInf
            } else if u < 0.1 {
                ExtReal::PosInf
            } else if k % 2 == 0 {
                ExtReal::Finite(centre + rng.gen_range(-2.0..2.0))
            } else {
                ExtReal::Finite(rng.gen_range(-20.0..20.0))
            };
        }
        asym_max = asym_max.max(spec.contraction_value(lambda, &ys));
    }
    let bound = (1.0 - delta).sqrt();
    let within = alpha_hat.max(asym_max) <= bound + TOL;
    let status = match (precondition, within) {
        (false, _) => CertStatus::FailPrecondition,
        (true, true) => CertStatus::Pass,
        (true, false) => CertStatus::Fail,
    };
    Ok(ContractionCertificate {
        d,
        lambda,
        delta,
        decay: dv.f,
        alpha_hat,
        argmax_y,
        asym_max,
        symmetrization_ok: asym_max <= alpha_hat + TOL,
        bound,
        pass: status == CertStatus::Pass,
        status,
        label: "numeric certificate",
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessCertificate {
    pub d1: usize,
    pub d2: usize,
    pub lambda: f64,
    /// `max φ` over `J_{λ,d₁}`.
    pub max_phi: f64,
    /// `max h^φ` over `J_{λ,d₂}`.
    pub max_h_phi: f64,
    pub max_product: f64,
    /// `2c / (d₁ + d₂ + 2)`.
    pub bound: f64,
    pub pass: bool,
    pub label: &'static str,
}

/// Maximizes `φ(y₁) h^φ(y₂)` over `J_{λ,d₁} × J_{λ,d₂}` and compares with
/// `2c/(d₁+d₂+2)`. The objective is separable, so each factor is maximized
/// on its own interval.
pub fn boundedness_certificate(spec: &PotentialSpec, lambda: f64, d1: usize, d2: usize, c: f64) -> Result<BoundednessCertificate> {
    if !(lambda > 0.0) || !(c > 0.0) {
        return param("lambda and c must be positive");
    }
    let (l1, h1) = image_interval(spec.beta, spec.gamma, lambda, d1);
    let (l2, h2) = image_interval(spec.beta, spec.gamma, lambda, d2);
    let (_, max_phi) = max_over(|y| spec.phi(y), l1, h1);
    let (_, max_h_phi) = max_over(|y| spec.h_phi(y), l2, h2);
    let max_product = max_phi * max_h_phi;
    let bound = 2.0 * c / (d1 + d2 + 2) as f64;
    Ok(BoundednessCertificate {
        d1,
        d2,
        lambda,
        max_phi,
        max_h_phi,
        max_product,
        bound,
        pass: max_product <= bound + TOL,
        label: "numeric certificate",
    })
}

/// `max |h|` over `J_{λ,d}`.
pub fn max_abs_h(beta: f64, gamma: f64, lambda: f64, d: usize) -> f64 {
    let (lo, hi) = image_interval(beta, gamma, lambda, d);
    let mut best = max_over(|y| h(beta, gamma, y).abs(), lo, hi).1;
    if beta > 0.0 {
        // The peak of |h| sits at ½ log(γ/β); include it when inside J.
        let peak = ExtReal::Finite(0.5 * (gamma / beta).ln());
        if lo <= peak && peak <= hi {
            best = best.max(h(beta, gamma, peak).abs());
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeCheck {
    pub field_side: f64,
    pub base_side: f64,
    pub pass: bool,
}

/// Checks `max_{J_{λ_v,d}} |h| ≤ max_{J_{λ,d}} |h|` for a vertex field `λ_v`.
pub fn envelope_check(beta: f64, gamma: f64, lambda: f64, lambda_v: f64, d: usize) -> EnvelopeCheck {
    let field_side = max_abs_h(beta, gamma, lambda_v, d);
    let base_side = max_abs_h(beta, gamma, lambda, d);
    EnvelopeCheck { field_side, base_side, pass: field_side <= base_side + TOL }
}
