//! Self-avoiding-walk trees, the tree recursion in log-ratio space, and
//! potential-function certificates.

mod potential;
mod saw;

pub use potential::*;
pub use saw::*;

use serde::{Serialize, Serializer};
use std::cmp::Ordering;

/// A point of `[−∞, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    /// `log r` for a ratio `r ∈ [0, +∞]`.
    pub fn log_of(r: f64) -> Self {
        if r == 0.0 {
            ExtReal::NegInf
        } else {
            Self::from_f64(r.ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `e^y`, with `e^{−∞} = 0` and `e^{+∞} = +∞`.
    pub fn exp(self) -> f64 {
        match self {
            ExtReal::NegInf => 0.0,
            ExtReal::Finite(x) => x.exp(),
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

/// `h(y) = −(1−βγ) e^y / ((β e^y + 1)(e^y + γ))`, exact at both endpoints.
pub fn h(beta: f64, gamma: f64, y: ExtReal) -> f64 {
    match y {
        ExtReal::NegInf => 0.0,
        ExtReal::PosInf => {
            if beta > 0.0 {
                0.0
            } else {
                -1.0
            }
        }
        ExtReal::Finite(y) => {
            if y > 0.0 {
                let lead = if beta == 0.0 { 1.0 } else { beta * y.exp() + 1.0 };
                -(1.0 - beta * gamma) / (lead * (1.0 + gamma * (-y).exp()))
            } else {
                let e = y.exp();
                -(1.0 - beta * gamma) * e / ((beta * e + 1.0) * (e + gamma))
            }
        }
    }
}

/// One child's contribution `log((β e^y + 1)/(e^y + γ))`.
fn edge_term(beta: f64, gamma: f64, y: ExtReal) -> ExtReal {
    match y {
        ExtReal::NegInf => ExtReal::Finite(-gamma.ln()),
        ExtReal::PosInf => ExtReal::log_of(beta),
        ExtReal::Finite(y) => {
            let v = if y > 0.0 {
                (beta + (-y).exp()).ln() - (1.0 + gamma * (-y).exp()).ln()
            } else {
                (beta * y.exp() + 1.0).ln() - (y.exp() + gamma).ln()
            };
            ExtReal::from_f64(v)
        }
    }
}

/// `H_{λ,d}(y₁,…,y_d) = log λ + Σ log((β e^{y_i} + 1)/(e^{y_i} + γ))`.
pub fn log_recursion(beta: f64, gamma: f64, lambda: f64, ys: &[ExtReal]) -> ExtReal {
    let mut acc = lambda.ln();
    for &y in ys {
        match edge_term(beta, gamma, y) {
            ExtReal::NegInf => return ExtReal::NegInf,
            ExtReal::Finite(t) => acc += t,
            ExtReal::PosInf => unreachable!("edge term is bounded above"),
        }
    }
    ExtReal::from_f64(acc)
}

/// `F_{λ,d}(R₁,…,R_d) = λ Π (β R_i + 1)/(R_i + γ)` in ratio space, with
/// `R_i = +∞` contributing the factor β.
pub fn ratio_recursion(beta: f64, gamma: f64, lambda: f64, rs: &[f64]) -> f64 {
    rs.iter().fold(lambda, |acc, &r| {
        if r == f64::INFINITY {
            acc * beta
        } else {
            acc * (beta * r + 1.0) / (r + gamma)
        }
    })
}

/// `J_{λ,d}`: the range of `H_{λ,d}` over `[−∞,+∞]^d`, i.e. the interval
/// between `log(λβ^d)` and `log(λ/γ^d)`.
pub fn image_interval(beta: f64, gamma: f64, lambda: f64, d: usize) -> (ExtReal, ExtReal) {
    let a = ExtReal::log_of(lambda * beta.powi(d as i32));
    let b = ExtReal::Finite(lambda.ln() - d as f64 * gamma.ln());
    if d == 0 {
        return (b, b);
    }
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_endpoints_are_exact() {
        assert_eq!(h(0.3, 1.2, ExtReal::NegInf), 0.0);
        assert_eq!(h(0.3, 1.2, ExtReal::PosInf), 0.0);
        assert_eq!(h(0.0, 1.0, ExtReal::PosInf), -1.0);
        assert!((h(0.0, 1.0, ExtReal::Finite(800.0)) + 1.0).abs() < 1e-15);
        assert_eq!(h(0.3, 1.2, ExtReal::Finite(800.0)), -0.0);
    }

    #[test]
    fn log_and_ratio_space_agree() {
        let rs = [0.3, 2.5, f64::INFINITY, 0.0];
        let ys: Vec<ExtReal> = rs.iter().map(|&r| ExtReal::log_of(r)).collect();
        let (b, g, l) = (0.4, 1.5, 0.7);
        let r = ratio_recursion(b, g, l, &rs);
        let y = log_recursion(b, g, l, &ys);
        assert!((y.to_f64() - r.ln()).abs() < 1e-12);
        assert_eq!(log_recursion(0.0, 1.0, 1.0, &[ExtReal::PosInf]), ExtReal::NegInf);
    }

    #[test]
    fn hardcore_interval_is_half_line() {
        let (lo, hi) = image_interval(0.0, 1.0, 2.0, 3);
        assert_eq!(lo, ExtReal::NegInf);
        assert!((hi.to_f64() - 2f64.ln()).abs() < 1e-15);
    }
}
