//! Value maps between radial profiles: the similarity rescaling
//! `v(s) = F^{-1}[λ^{-2} F(u(λ s))]` and the Cole–Hopf type map
//! `w = F_q^{-1}[F(v)]` onto the reference nonlinearity `u^p` or `e^u`.
//!
//! Both act pointwise on the grid of a trajectory; derivatives are carried
//! along by the chain rule, so the sign pattern of differences between two
//! profiles is preserved exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{classify, Nonlinearity};
use crate::radial_ode::{residual_norm, shoot_limit, Equation, Node, RadialSolution, Segment, ShootOptions};

/// `f_q(u) = u^p` with `p = q/(q-1)` for `q > 1`, and `e^u` for `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceNonlinearity {
    pub q: f64,
}

impl ReferenceNonlinearity {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Constraint(format!("q must be finite and >= 1, got {q}")));
        }
        Ok(ReferenceNonlinearity { q })
    }

    fn is_exp(&self) -> bool {
        self.q == 1.0
    }

    /// `p = q/(q-1)`, infinite for `q = 1`.
    pub fn p(&self) -> f64 {
        if self.is_exp() {
            f64::INFINITY
        } else {
            self.q / (self.q - 1.0)
        }
    }

    /// The same function as a [`Nonlinearity`].
    pub fn nonlinearity(&self) -> Nonlinearity {
        if self.is_exp() {
            Nonlinearity::exponential()
        } else {
            Nonlinearity::power(self.p(), 0.0).expect("p > 1")
        }
    }

    pub fn contains(&self, w: f64) -> bool {
        self.is_exp() || w > 0.0
    }

    pub fn ln_f(&self, w: f64) -> f64 {
        if self.is_exp() {
            w
        } else {
            self.p() * w.ln()
        }
    }

    pub fn f(&self, w: f64) -> f64 {
        self.ln_f(w).exp()
    }

    /// `f_q'/f_q`.
    pub fn dln_f(&self, w: f64) -> f64 {
        if self.is_exp() {
            1.0
        } else {
            self.p() / w
        }
    }

    /// `ln F_q(w)`.
    pub fn ln_big_f(&self, w: f64) -> Result<f64> {
        if !self.contains(w) || w.is_nan() {
            return Err(Error::Domain(w));
        }
        Ok(if self.is_exp() {
            -w
        } else {
            let p = self.p();
            (1.0 - p) * w.ln() - (p - 1.0).ln()
        })
    }

    pub fn big_f(&self, w: f64) -> Result<f64> {
        Ok(self.ln_big_f(w)?.exp())
    }

    /// `F_q^{-1}(e^{ln_w})`.
    pub fn big_f_inv_ln(&self, ln_w: f64) -> Result<f64> {
        if !ln_w.is_finite() {
            return Err(Error::Bracketing { target: ln_w.exp() });
        }
        Ok(if self.is_exp() {
            -ln_w
        } else {
            let p = self.p();
            (-(ln_w + (p - 1.0).ln()) / (p - 1.0)).exp()
        })
    }

    pub fn big_f_inv(&self, w: f64) -> Result<f64> {
        if !(w > 0.0) {
            return Err(Error::Bracketing { target: w });
        }
        self.big_f_inv_ln(w.ln())
    }
}

/// Value map `u -> G(u)` with `G'(u)` and `G''(u)`.
type ValueMap<'a> = dyn FnMut(f64) -> Result<(f64, f64, f64)> + 'a;

/// Applies `G` to every node, stopping at the first node where `keep` fails
/// (the continuation past the domain edge of a trajectory).
fn map_nodes(
    sol: &RadialSolution,
    keep: impl Fn(f64) -> bool,
    g: &mut ValueMap<'_>,
) -> Result<Vec<Node>> {
    let mut out = Vec::with_capacity(sol.nodes.len());
    for node in &sol.nodes {
        if !keep(node.u) {
            break;
        }
        let (v, g1, g2) = g(node.u)?;
        out.push(Node { x: node.x, u: v, ux: g1 * node.ux, uxx: g2 * node.ux * node.ux + g1 * node.uxx });
    }
    if out.len() < 2 {
        return Err(Error::Constraint("fewer than two grid nodes inside the domain".into()));
    }
    Ok(out)
}

/// Wraps mapped nodes; radii are multiplied by `e^{ln_shift}`.
fn retag(sol: &RadialSolution, nodes: Vec<Node>, equation: Equation, f_id: &str, ln_shift: f64) -> RadialSolution {
    let mut segments: Vec<Segment> = sol.segments.iter().copied().filter(|s| s.start < nodes.len()).collect();
    for s in &mut segments {
        s.ln_scale += ln_shift;
    }
    // value maps move zeros, so the recorded one no longer applies
    RadialSolution {
        equation,
        n: sol.n,
        f_id: f_id.to_string(),
        center_value: nodes[0].u,
        segments,
        nodes,
        first_zero: None,
        termination: sol.termination,
        tol: sol.tol,
    }
}

/// `G(u) = B^{-1}[α A(u)]` where `A' = -1/f_A`, `B' = -1/f_B`: `G' = α f_B(G)/f_A`
/// and `G'' = G' (L_B'(G) G' - L_A'(u))` with `L = ln f`.
fn chain(g1: f64, dln_fb_v: f64, dln_fa_u: f64) -> f64 {
    g1 * (dln_fb_v * g1 - dln_fa_u)
}

fn growth_q(f: &Nonlinearity, sol: &RadialSolution) -> Result<f64> {
    match sol.equation {
        Equation::Limit { q } => Ok(q),
        Equation::Original => match f.q_analytic() {
            Some(q) => Ok(q),
            None => Ok(classify(f, sol.n)?.q),
        },
    }
}

/// `v(s) = F^{-1}[λ^{-2} F(u(λ s))]`, `s = r/λ`. The result is tagged as a
/// limit-equation trajectory; it solves that equation exactly when `sol`
/// does, or when `F f'` is constant.
pub fn similarity_rescale(f: &Nonlinearity, sol: &RadialSolution, lambda: f64) -> Result<RadialSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Constraint(format!("lambda must be positive, got {lambda}")));
    }
    let q = growth_q(f, sol)?;
    let shift = -2.0 * lambda.ln();
    let mut hint = f64::NAN;
    let mut g = |u: f64| -> Result<(f64, f64, f64)> {
        if lambda == 1.0 {
            return Ok((u, 1.0, 0.0));
        }
        let ln_big = f.ln_big_f(u)?;
        let v = f.big_f_inv_ln_from(ln_big + shift, hint)?;
        if !f.contains(v) {
            return Err(Error::Bracketing { target: (ln_big + shift).exp() });
        }
        hint = v;
        let (lv, dv, _) = f.log_derivs(v);
        let (lu, du, _) = f.log_derivs(u);
        let g1 = (shift + lv - lu).exp();
        Ok((v, g1, chain(g1, dv, du)))
    };
    let nodes = map_nodes(sol, |u| f.contains(u), &mut g)?;
    Ok(retag(sol, nodes, Equation::Limit { q }, f.id(), -lambda.ln()))
}

/// `w = F_q^{-1}[F(v)]`; the result solves `Δw + f_q(w) = 0` when `sol`
/// solves the limit equation for `q`.
pub fn cole_hopf_forward(f: &Nonlinearity, q: f64, sol: &RadialSolution) -> Result<RadialSolution> {
    let reference = ReferenceNonlinearity::new(q)?;
    let mut g = |v: f64| -> Result<(f64, f64, f64)> {
        let w = reference.big_f_inv_ln(f.ln_big_f(v)?)?;
        let (lv, dv, _) = f.log_derivs(v);
        let g1 = (reference.ln_f(w) - lv).exp();
        Ok((w, g1, chain(g1, reference.dln_f(w), dv)))
    };
    let nodes = map_nodes(sol, |v| f.contains(v), &mut g)?;
    let id = reference.nonlinearity().id().to_string();
    Ok(retag(sol, nodes, Equation::Original, &id, 0.0))
}

/// `v = F^{-1}[F_q(w)]`, the inverse of [`cole_hopf_forward`].
pub fn cole_hopf_inverse(f: &Nonlinearity, q: f64, sol: &RadialSolution) -> Result<RadialSolution> {
    let reference = ReferenceNonlinearity::new(q)?;
    let mut hint = f64::NAN;
    let mut g = |w: f64| -> Result<(f64, f64, f64)> {
        let ln_big = reference.ln_big_f(w)?;
        let v = f.big_f_inv_ln_from(ln_big, hint)?;
        if !f.contains(v) {
            return Err(Error::Bracketing { target: ln_big.exp() });
        }
        hint = v;
        let (lv, dv, _) = f.log_derivs(v);
        let g1 = (lv - reference.ln_f(w)).exp();
        Ok((v, g1, chain(g1, dv, reference.dln_f(w))))
    };
    let nodes = map_nodes(sol, |w| reference.contains(w), &mut g)?;
    Ok(retag(sol, nodes, Equation::Limit { q }, f.id(), 0.0))
}

/// `τ = F_q^{-1}[F(σ)]`.
pub fn tau(f: &Nonlinearity, q: f64, sigma: f64) -> Result<f64> {
    ReferenceNonlinearity::new(q)?.big_f_inv_ln(f.ln_big_f(sigma)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ColeHopfReport {
    pub q: f64,
    pub sigma: f64,
    pub tau: f64,
    /// `|w(0) - τ|`.
    pub tau_gap: f64,
    /// Residual of `Δw + f_q(w) = 0` on the transformed grid.
    pub residual: f64,
    /// Residual of the limit equation on the original grid.
    pub limit_residual: f64,
    pub nodes: usize,
}

/// Shoots the limit problem from `σ`, maps it to the reference equation and
/// measures how well the image solves it.
pub fn verify_cole_hopf(f: &Nonlinearity, n: u32, q: f64, sigma: f64, opts: ShootOptions) -> Result<ColeHopfReport> {
    let v = shoot_limit(f, n, q, sigma, opts)?;
    let w = cole_hopf_forward(f, q, &v)?;
    let reference = ReferenceNonlinearity::new(q)?.nonlinearity();
    let t = tau(f, q, sigma)?;
    Ok(ColeHopfReport {
        q,
        sigma,
        tau: t,
        tau_gap: (w.nodes[0].u - t).abs(),
        residual: residual_norm(&reference, &w),
        limit_residual: residual_norm(f, &v),
        nodes: w.nodes.len(),
    })
}
