//! Growth exponent `q`, critical exponents and regime classification.

use serde::{Serialize, Serializer};

use super::Nonlinearity;
use crate::error::{Error, Result};
use crate::quad;

const REGIME_TOL: f64 = 1e-9;

pub fn q_sobolev(n: u32) -> f64 {
    (n as f64 + 2.0) / 4.0
}

pub fn q_jl(n: u32) -> f64 {
    let n = n as f64;
    (n - 2.0 * (n - 1.0).sqrt()) / 4.0
}

/// `(N + 2) / (N - 2)`, infinite for `N <= 2`.
pub fn p_sobolev(n: u32) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        (n as f64 + 2.0) / (n as f64 - 2.0)
    }
}

/// Joseph–Lundgren exponent, infinite for `N <= 10`.
pub fn p_jl(n: u32) -> f64 {
    if n <= 10 {
        f64::INFINITY
    } else {
        let m = n as f64;
        1.0 + 4.0 / (m - 4.0 - 2.0 * (m - 1.0).sqrt())
    }
}

pub(crate) fn ser_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Critical,
    Oscillatory,
    Stable,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub q: f64,
    #[serde(serialize_with = "ser_real")]
    pub p: f64,
    #[serde(rename = "q_S")]
    pub q_s: f64,
    #[serde(rename = "q_JL")]
    pub q_jl: f64,
    #[serde(rename = "p_S", serialize_with = "ser_real")]
    pub p_s: f64,
    #[serde(rename = "p_JL", serialize_with = "ser_real")]
    pub p_jl: f64,
    pub k: f64,
    pub regime: Regime,
    /// `q` coincides with `q_JL` within the regime tolerance.
    pub jl_borderline: bool,
}

impl ExponentReport {
    pub fn new(n: u32, q: f64) -> Self {
        let q_s = q_sobolev(n);
        let qj = q_jl(n);
        let p = if q > 1.0 { q / (q - 1.0) } else { f64::INFINITY };
        let jl_borderline = (q - qj).abs() <= REGIME_TOL;
        let regime = if (q - q_s).abs() <= REGIME_TOL {
            Regime::Critical
        } else if q > q_s {
            Regime::OutOfScope
        } else if q < qj || jl_borderline {
            Regime::Stable
        } else {
            Regime::Oscillatory
        };
        ExponentReport {
            n,
            q,
            p,
            q_s,
            q_jl: qj,
            p_s: p_sobolev(n),
            p_jl: p_jl(n),
            k: 2.0 * n as f64 - 4.0 * q,
            regime,
            jl_borderline,
        }
    }
}

/// Exponent report for `f` in dimension `n`, using the analytic `q` when known.
pub fn classify(f: &Nonlinearity, n: u32) -> Result<ExponentReport> {
    if n < 3 {
        return Err(Error::Constraint(format!("dimension N must be at least 3, got {n}")));
    }
    let q = match f.q_analytic() {
        Some(q) => q,
        None => estimate_q(f)?.q,
    };
    Ok(ExponentReport::new(n, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QMethod {
    Aitken,
    Richardson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QEstimate {
    pub q: f64,
    pub method: QMethod,
    /// `(u_j, F(u_j) f'(u_j))` at the nodes used.
    pub nodes: Vec<(f64, f64)>,
    /// `f'^2 / (f f'')` at the last three nodes.
    pub ratio_tail: Vec<f64>,
}

fn aitken(a: &[f64]) -> Vec<f64> {
    a.windows(3)
        .map(|w| {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if d2.abs() <= 1e-15 * w[2].abs().max(1.0) {
                w[2]
            } else {
                w[2] - (w[2] - w[1]).powi(2) / (w[2] - 2.0 * w[1] + w[0])
            }
        })
        .collect()
}

/// Polynomial extrapolation to `x = 0` (Neville).
fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let m = x.len();
    for k in 1..m {
        for i in 0..m - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// Estimates `q = lim F f'` by extrapolating `F(u_j) f'(u_j)` along
/// geometric nodes `u_j = max(u_c2_floor, 1) · 10^j`.
pub fn estimate_q(f: &Nonlinearity) -> Result<QEstimate> {
    const DECADES: i32 = 14;
    let base = f.u_c2_floor().max(1.0);
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for refine in 0..6 {
        let per_decade = 1 << refine;
        nodes.clear();
        for j in 0..=DECADES * per_decade {
            let u = base * 10f64.powf(j as f64 / per_decade as f64);
            let (_, d, dd) = f.log_derivs(u);
            if !d.is_finite() || !dd.is_finite() {
                break;
            }
            match f.ln_big_f_and_phi(u) {
                Ok((lf, phi)) if lf.is_finite() && phi.is_finite() => nodes.push((u, phi)),
                Ok(_) => break,
                Err(e) => return Err(e),
            }
        }
        if nodes.len() >= 5 {
            break;
        }
    }
    if nodes.len() < 3 {
        return Err(Error::LimitDetection { tail: nodes.iter().map(|n| n.1).collect() });
    }
    let values: Vec<f64> = nodes.iter().map(|n| n.1).collect();
    let tail_ratio: Vec<f64> = nodes[nodes.len().saturating_sub(3)..]
        .iter()
        .map(|n| f.growth_ratio(n.0))
        .collect();

    let acc = aitken(&values);
    let mut result = None;
    for w in acc.windows(2) {
        if (w[1] - w[0]).abs() < 1e-6 {
            // keep scanning: later extrapolants are closer to the limit
            result = Some(w[1]);
        } else {
            result = None;
        }
    }
    let (q, method) = match result {
        Some(q) => (q, QMethod::Aitken),
        None => {
            // logarithmic convergence: extrapolate in 1/ln u
            let m = values.len().min(8);
            if m < 6 {
                return Err(Error::LimitDetection { tail: values[values.len() - m..].to_vec() });
            }
            let start = values.len() - m;
            let x: Vec<f64> = nodes[start..].iter().map(|n| 1.0 / n.0.ln()).collect();
            let y = &values[start..];
            let full = extrapolate_to_zero(&x, y);
            let short = extrapolate_to_zero(&x[1..], &y[1..]);
            if !full.is_finite() || (full - short).abs() > 1e-4 {
                return Err(Error::LimitDetection { tail: y.to_vec() });
            }
            (full, QMethod::Richardson)
        }
    };
    if q < 1.0 - 1e-6 {
        return Err(Error::QBelowOne(q));
    }
    Ok(QEstimate { q, method, nodes, ratio_tail: tail_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperlinearityReport {
    pub passed: bool,
    /// `min (u f(u+M) / H(u) - (1 + p̄))` over the sampled `u`.
    pub worst_margin: f64,
    pub p_bar: f64,
    pub shift: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Checks `u f(u+M) >= (1 + p̄) ∫_0^u f(t+M) dt` with `p̄` just above the
/// Sobolev exponent on a log grid covering three decades above `u_floor`.
pub fn check_superlinearity(f: &Nonlinearity, n: u32, u_floor: f64, shift: f64) -> Result<SuperlinearityReport> {
    if !(u_floor > 0.0) {
        return Err(Error::Constraint("u_floor must be positive".into()));
    }
    if !f.contains(shift) {
        return Err(Error::Domain(shift));
    }
    let p_bar = p_sobolev(n) + 1e-3;
    let mut samples = Vec::new();
    let mut worst = f64::INFINITY;
    for j in 0..=12 {
        let u = u_floor * 10f64.powf(j as f64 / 4.0);
        let top = u + shift;
        // ∫_0^u f(t+M) dt / f(u+M) as ∫_0^u exp(-[L(u+M) - L(u+M-s)]) ds
        let scale = 1.0 / f.log_derivs(top).1.max(1.0 / (1.0 + top.abs()));
        let g = |s: f64| {
            let d = f.delta_ln_f(top - s, s);
            if d.is_nan() {
                0.0
            } else {
                (-d).exp()
            }
        };
        let mut total = 0.0;
        let mut lo = 0.0;
        let mut hi = (32.0 * scale).min(u);
        loop {
            let r = quad::integrate(g, lo, hi, 1e-12, 1e-300, 4000);
            if !r.converged {
                return Err(Error::Quadrature { reached: hi, residual: r.error });
            }
            total += r.value;
            if hi >= u {
                break;
            }
            lo = hi;
            hi = (2.0 * hi).min(u);
        }
        let ratio = u / total;
        let margin = ratio - (1.0 + p_bar);
        worst = worst.min(margin);
        samples.push((u, ratio));
    }
    Ok(SuperlinearityReport { passed: worst >= 0.0, worst_margin: worst, p_bar, shift, samples })
}
