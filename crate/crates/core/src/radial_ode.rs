//! Shooting for `u'' + (N-1)/r u' + f(u) = 0` and the limit equation
//! `v'' + (N-1)/s v' + f(v) + c(v) v'^2 = 0`, `c = (q - F f') / (F f)`.
//!
//! Trajectories are integrated in the scaled radius `x = r / ℓ` with
//! `ℓ = f(u_0)^{-1/2}`, so the equation becomes
//! `u_xx + (N-1)/x u_x + ℓ² f(u) + c(u) u_x² = 0` and stays O(1) even when
//! `f(u_0)` overflows.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::Quintic;
use crate::nonlinearity::{classify, DomainClass, Nonlinearity, Regime};
use crate::ode::{self, Control, StepOpts, Stop};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_R_MAX: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Equation {
    Original,
    Limit { q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    ReachedRmax,
    FirstZero,
    BlowDown,
    StepFailure,
}

/// What to do when `u` changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroMode {
    /// Locate the first zero and stop there.
    Stop,
    /// Locate the first zero and keep integrating.
    Record,
    /// Ignore sign changes.
    Off,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub tol: f64,
    pub r_max: f64,
    /// `None` picks `Stop` for `F11` nonlinearities and `Record` otherwise.
    pub zero: Option<ZeroMode>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { tol: DEFAULT_TOL, r_max: DEFAULT_R_MAX, zero: None }
    }
}

impl ShootOptions {
    pub fn new(tol: f64, r_max: f64) -> Self {
        ShootOptions { tol, r_max, zero: None }
    }

    pub fn zero_mode(mut self, mode: ZeroMode) -> Self {
        self.zero = Some(mode);
        self
    }
}

/// Grid node in scaled coordinates: `(x, u, u_x, u_xx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
}

/// A run of nodes sharing one radial scale: `r = e^{ln_scale} x`.
///
/// A long trajectory is split whenever `x` grows past [`RESCALE_AT`], so the
/// scaled derivatives never leave the normal floating-point range. The first
/// node of a segment repeats the last node of the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub ln_scale: f64,
}

/// Scaled radius at which the integration restarts with a new scale.
pub const RESCALE_AT: f64 = 1e32;

/// Dense trajectory of a radial equation.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub equation: Equation,
    pub n: u32,
    pub f_id: String,
    /// `u` at the first node (`u(0)` for trajectories shot from the center).
    pub center_value: f64,
    pub segments: Vec<Segment>,
    pub nodes: Vec<Node>,
    pub first_zero: Option<f64>,
    pub termination: Termination,
    pub tol: f64,
}

/// Rejects tolerances outside `[1e-12, 1e-4]`.
pub fn check_tol(tol: f64) -> Result<()> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::Constraint(format!("tol must lie in [1e-12, 1e-4], got {tol}")));
    }
    Ok(())
}

/// `c(v) = (q - F f') / (F f)`, the gradient coefficient of the limit equation.
pub fn limit_coefficient(f: &Nonlinearity, q: f64, v: f64) -> Result<f64> {
    if f.is_scale_invariant() {
        return Ok(0.0);
    }
    let (ln_big, phi) = f.ln_big_f_and_phi(v)?;
    Ok((q - phi) * (-ln_big - f.ln_f(v)).exp())
}

#[derive(Clone, Copy)]
struct Rhs<'a> {
    f: &'a Nonlinearity,
    n: f64,
    two_ln_scale: f64,
    q: Option<f64>,
    clamp: bool,
}

impl Rhs<'_> {
    /// `u_xx` at `(x, u, u_x)`, or `None` outside the domain of `f`.
    fn uxx(&self, x: f64, u: f64, ux: f64) -> Option<f64> {
        let (src, c) = if self.f.contains(u) {
            let src = (self.f.ln_f(u) + self.two_ln_scale).exp();
            let c = match self.q {
                Some(q) => limit_coefficient(self.f, q, u).ok().filter(|c| c.is_finite())?,
                None => 0.0,
            };
            (src, c)
        } else if self.clamp {
            // only used to bracket the zero, just past the domain edge
            edge_terms(self.f, self.q, self.two_ln_scale)
        } else {
            return None;
        };
        let v = -(self.n - 1.0) / x * ux - src - c * ux * ux;
        v.is_finite().then_some(v)
    }
}

/// Source and gradient coefficient frozen at the lower domain edge; used only
/// to bracket the first zero just past it.
fn edge_terms(f: &Nonlinearity, q: Option<f64>, two_ln_scale: f64) -> (f64, f64) {
    let d = f.domain();
    if !d.inclusive {
        return (0.0, 0.0);
    }
    let src = (f.ln_f(d.lo) + two_ln_scale).exp();
    let c = match q {
        Some(q) => limit_coefficient(f, q, d.lo).ok().filter(|c| c.is_finite()).unwrap_or(0.0),
        None => 0.0,
    };
    (src, c)
}

/// Starting data for a trajectory.
enum Start {
    Center(f64),
    At { r: f64, u: f64, du: f64 },
}

fn integrate(f: &Nonlinearity, n: u32, equation: Equation, start: Start, opts: ShootOptions) -> Result<RadialSolution> {
    check_tol(opts.tol)?;
    if n < 1 {
        return Err(Error::Constraint("dimension N must be positive".into()));
    }
    if !(opts.r_max > 0.0) {
        return Err(Error::Constraint(format!("r_max must be positive, got {}", opts.r_max)));
    }
    let u_start = match start {
        Start::Center(rho) => rho,
        Start::At { u, .. } => u,
    };
    if !f.contains(u_start) || !u_start.is_finite() {
        return Err(Error::Domain(u_start));
    }
    let mode = opts.zero.unwrap_or(match f.domain_class() {
        DomainClass::F11 => ZeroMode::Stop,
        DomainClass::F12 => ZeroMode::Record,
    });
    let l0 = f.ln_f(u_start);
    let ln_scale = if l0.is_finite() { -0.5 * l0 } else { 0.0 };
    let scale = ln_scale.exp();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Constraint(format!("scale exp({ln_scale}) is not representable")));
    }
    let q = match equation {
        Equation::Original => None,
        Equation::Limit { q } => Some(q),
    };
    let rhs = Rhs { f, n: n as f64, two_ln_scale: 2.0 * ln_scale, q, clamp: mode != ZeroMode::Off };
    let nf = n as f64;
    let x_max = opts.r_max / scale;
    let tol = opts.tol;
    let mut nodes = Vec::new();

    let (x0, y0) = match start {
        Start::Center(rho) => {
            let (_, l1, l2) = f.log_derivs(rho);
            let g0 = (f.ln_f(rho) + 2.0 * ln_scale).exp();
            let (g1, g2) = if g0 > 0.0 { (g0 * l1, g0 * (l2 + l1 * l1)) } else { (0.0, 0.0) };
            let c0 = match q {
                Some(q) => limit_coefficient(f, q, rho)?,
                None => 0.0,
            };
            let a2 = -g0 / (2.0 * nf);
            let a4 = -(g1 * a2 + 4.0 * c0 * a2 * a2) / (4.0 * (nf + 2.0));
            let a6 = -(g1 * a4 + 0.5 * g2 * a2 * a2 + 16.0 * c0 * a2 * a4) / (6.0 * (nf + 4.0));
            let cap = if g0 > 0.0 { 0.1 * (2.0 * nf / g0).sqrt() } else { 1.0 };
            let mut xs = if a6 != 0.0 && a6.is_finite() {
                // truncation of the series and the residual of its quintic
                // interpolant on [0, xs] both stay below tol
                let trunc = (tol * rho.abs().max(1.0) / a6.abs()).powf(1.0 / 6.0);
                let interp = (tol / ((24.0 + 6.0 * nf) * a6.abs())).powf(0.25);
                trunc.min(interp)
            } else {
                cap
            };
            xs = xs.min(cap).min(x_max);
            nodes.push(Node { x: 0.0, u: rho, ux: 0.0, uxx: 2.0 * a2 });
            let u = rho + xs * xs * (a2 + a4 * xs * xs);
            let ux = xs * (2.0 * a2 + 4.0 * a4 * xs * xs);
            let uxx = rhs.uxx(xs, u, ux).ok_or(Error::DomainExit { r: xs * scale })?;
            nodes.push(Node { x: xs, u, ux, uxx });
            (xs, [u, ux])
        }
        Start::At { r, u, du } => {
            let x = r / scale;
            let ux = du * scale;
            let uxx = rhs.uxx(x, u, ux).ok_or(Error::DomainExit { r })?;
            nodes.push(Node { x, u, ux, uxx });
            (x, [u, ux])
        }
    };

    let mut first_zero = None;
    let mut stopped_at_zero = false;
    let mut segments = vec![Segment { start: 0, ln_scale }];
    let mut seg_ln = ln_scale;
    let (mut x0, mut y0) = (x0, y0);
    let mut h_init = matches!(start, Start::Center(_)).then_some(x0);
    let ln_r_max = opts.r_max.ln();
    let stop = loop {
        let x_end = (ln_r_max - seg_ln).exp();
        let x_stop = x_end.min(RESCALE_AT);
        if x0 >= x_stop {
            break Stop::Reached;
        }
        let rhs = Rhs { two_ln_scale: 2.0 * seg_ln, ..rhs };
        let seg_scale = seg_ln.exp();
        let mut step_opts = StepOpts::with_tol(tol);
        // near the center the series interval is a safe first step (tiny
        // steps only raise the rounding level of the interpolant); after a
        // restart the previous step length carries over
        step_opts.h_init = h_init;
        let stop = ode::integrate(
            |x, y: &[f64; 2]| Some([y[1], rhs.uxx(x, y[0], y[1])?]),
            x0,
            y0,
            x_stop,
            &step_opts,
            |s| {
                let a = (s.y0[0], s.y0[1], s.f0[1]);
                let b = (s.y1[0], s.y1[1], s.f1[1]);
                let cell = Quintic::new(s.x0, s.x1, a, b);
                // defect control: the interpolant must satisfy the equation
                // at the cell midpoint
                let m = 0.5 * (s.x0 + s.x1);
                let (um, uxm, uxxm) = cell.eval(m);
                let d = defect(f, nf, 2.0 * seg_ln, q, m, um, uxm, uxxm);
                if !(d <= tol) {
                    // u_xx of the interpolant carries rounding of order eps/h²;
                    // below that level a shorter step only makes it worse
                    let h = s.x1 - s.x0;
                    let size = a.0.abs().max(b.0.abs()) / (h * h) + a.1.abs().max(b.1.abs()) / h;
                    let norm = 1f64.max(uxxm.abs()).max(((nf - 1.0) / m * uxm).abs());
                    let floor = 32.0 * f64::EPSILON * size / norm;
                    if !(d <= floor) {
                        return Control::Retry;
                    }
                }
                if first_zero.is_none() && mode != ZeroMode::Off && a.0 > 0.0 && b.0 <= 0.0 {
                    let xz = locate_zero(&cell, s.x0, s.x1);
                    first_zero = Some(xz * seg_scale);
                    if mode == ZeroMode::Stop {
                        let (u, ux, _) = cell.eval(xz);
                        let uxx = rhs.uxx(xz, u.max(0.0), ux).unwrap_or(b.2);
                        nodes.push(Node { x: xz, u, ux, uxx });
                        stopped_at_zero = true;
                        return Control::Stop;
                    }
                }
                nodes.push(Node { x: s.x1, u: b.0, ux: b.1, uxx: b.2 });
                // past the zero and outside the domain: stop here
                if f.contains(s.y1[0]) {
                    Control::Continue
                } else {
                    Control::Stop
                }
            },
        );
        if stop != Stop::Reached || x_stop >= x_end {
            break match stop {
                Stop::Domain { x } => Stop::Domain { x: x * seg_scale },
                Stop::Underflow { x } => Stop::Underflow { x: x * seg_scale },
                other => other,
            };
        }
        // restart with the current point at x = 1
        let last = nodes[nodes.len() - 1];
        let prev = nodes[nodes.len() - 2];
        let xc = last.x;
        seg_ln += xc.ln();
        segments.push(Segment { start: nodes.len(), ln_scale: seg_ln });
        nodes.push(Node { x: 1.0, u: last.u, ux: last.ux * xc, uxx: last.uxx * xc * xc });
        h_init = Some((last.x - prev.x) / xc);
        x0 = 1.0;
        y0 = [last.u, last.ux * xc];
    };
    let termination = match stop {
        Stop::Reached => Termination::ReachedRmax,
        Stop::Callback if stopped_at_zero => Termination::FirstZero,
        Stop::Callback => Termination::BlowDown,
        Stop::Domain { x: r } => {
            if mode == ZeroMode::Off && f.domain_class() == DomainClass::F11 {
                return Err(Error::DomainExit { r });
            }
            if nodes.last().is_some_and(|n| n.u > 0.0) && first_zero.is_none() {
                return Err(Error::DomainExit { r });
            }
            Termination::BlowDown
        }
        Stop::Underflow { x: r } => return Err(Error::StepFailure { r }),
        Stop::MaxSteps { .. } => Termination::StepFailure,
    };
    Ok(RadialSolution {
        equation,
        n,
        f_id: f.id().to_string(),
        center_value: u_start,
        segments,
        nodes,
        first_zero,
        termination,
        tol,
    })
}

/// Bisection for the sign change of `cell` on `[a, b]` (u(a) > 0 >= u(b)),
/// followed by one Newton step on the interpolant.
fn locate_zero(cell: &Quintic, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if cell.eval(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    let (u, du, _) = cell.eval(x);
    let newton = x - u / du;
    if du < 0.0 && newton >= a && newton <= b && (newton - x).abs() <= (hi - lo) {
        newton
    } else {
        x
    }
}

/// Regular solution `u(0) = ρ, u'(0) = 0` of the original equation.
pub fn shoot_regular(f: &Nonlinearity, n: u32, rho: f64, opts: ShootOptions) -> Result<RadialSolution> {
    integrate(f, n, Equation::Original, Start::Center(rho), opts)
}

/// Regular solution `v(0) = σ, v'(0) = 0` of the limit equation.
pub fn shoot_limit(f: &Nonlinearity, n: u32, q: f64, sigma: f64, opts: ShootOptions) -> Result<RadialSolution> {
    if !(q >= 1.0) {
        return Err(Error::Constraint(format!("q must be at least 1, got {q}")));
    }
    integrate(f, n, Equation::Limit { q }, Start::Center(sigma), opts)
}

/// Continues the original equation outward from `(r, u, u')` with `r > 0`.
pub fn shoot_from(f: &Nonlinearity, n: u32, r: f64, u: f64, du: f64, opts: ShootOptions) -> Result<RadialSolution> {
    if !(r > 0.0) || r >= opts.r_max {
        return Err(Error::Constraint(format!("start radius {r} must lie in (0, r_max)")));
    }
    integrate(f, n, Equation::Original, Start::At { r, u, du }, opts)
}

impl RadialSolution {
    /// Builds a trajectory from physical samples `(r, u, u', u'')`.
    pub fn from_samples(
        f: &Nonlinearity,
        n: u32,
        equation: Equation,
        samples: &[(f64, f64, f64, f64)],
        tol: f64,
    ) -> Result<Self> {
        if samples.len() < 2 || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Constraint("samples need at least two strictly increasing radii".into()));
        }
        let nodes = samples.iter().map(|&(r, u, ux, uxx)| Node { x: r, u, ux, uxx }).collect();
        Ok(RadialSolution {
            equation,
            n,
            f_id: f.id().to_string(),
            center_value: samples[0].1,
            segments: vec![Segment { start: 0, ln_scale: 0.0 }],
            nodes,
            first_zero: None,
            termination: Termination::ReachedRmax,
            tol,
        })
    }

    /// `ln ℓ` of the first segment.
    pub fn ln_scale(&self) -> f64 {
        self.segments[0].ln_scale
    }

    /// Shifts every segment scale by `delta` (radii multiply by `e^delta`).
    pub fn rescale_radii(&mut self, delta: f64) {
        for s in &mut self.segments {
            s.ln_scale += delta;
        }
    }

    /// Node index range `[start, end)` of segment `k`.
    fn segment_nodes(&self, k: usize) -> (usize, usize) {
        let end = self.segments.get(k + 1).map_or(self.nodes.len(), |s| s.start);
        (self.segments[k].start, end.min(self.nodes.len()))
    }

    fn segment_of(&self, i: usize) -> usize {
        self.segments.partition_point(|s| s.start <= i) - 1
    }

    fn node_r(&self, i: usize) -> f64 {
        self.nodes[i].x * self.segments[self.segment_of(i)].ln_scale.exp()
    }

    pub fn r_min(&self) -> f64 {
        self.node_r(0)
    }

    pub fn r_max(&self) -> f64 {
        self.node_r(self.nodes.len() - 1)
    }

    /// Indices of nodes that start a new physical point (segment starts
    /// after the first repeat the previous node).
    fn distinct(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| i == 0 || !self.segments[1..].iter().any(|s| s.start == i))
    }

    /// Physical radii of the nodes.
    pub fn radii(&self) -> Vec<f64> {
        self.distinct().map(|i| self.node_r(i)).collect()
    }

    fn cell(&self, i: usize) -> Quintic {
        let a = &self.nodes[i];
        let b = &self.nodes[i + 1];
        Quintic::new(a.x, b.x, (a.u, a.ux, a.uxx), (b.u, b.ux, b.uxx))
    }

    /// Cells `(i, segment)` whose ends lie in the same segment.
    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.segments.len()).flat_map(move |k| {
            let (a, b) = self.segment_nodes(k);
            (a..b.saturating_sub(1)).map(move |i| (i, k))
        })
    }

    /// `(u(r), u'(r))` from the dense output.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        let k = self.segments.partition_point(|s| s.start < self.nodes.len() && self.node_r(s.start) <= r).max(1) - 1;
        let (a, b) = self.segment_nodes(k);
        let scale = self.segments[k].ln_scale.exp();
        let x = r / scale;
        let nodes = &self.nodes[a..b];
        let i = a + nodes.partition_point(|n| n.x <= x).clamp(1, nodes.len().max(2) - 1) - 1;
        let (u, ux, _) = self.cell(i).eval(x);
        Ok((u, ux / scale))
    }

    /// Physical rows `(r, u, u')` at the nodes.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        self.distinct()
            .map(|i| {
                let s = self.segments[self.segment_of(i)].ln_scale.exp();
                let n = &self.nodes[i];
                (n.x * s, n.u, n.ux / s)
            })
            .collect()
    }

    /// CSV with header `r,u,du`, one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,du\n");
        for (r, u, du) in self.rows() {
            let _ = writeln!(out, "{r:.16e},{u:.16e},{du:.16e}");
        }
        out
    }
}

/// ODE residual at scaled radius `x`, relative to the size of the terms.
#[allow(clippy::too_many_arguments)]
fn defect(f: &Nonlinearity, nf: f64, two_ln_scale: f64, q: Option<f64>, x: f64, u: f64, ux: f64, uxx: f64) -> f64 {
    let radial = (nf - 1.0) / x * ux;
    let (src, c) = if f.contains(u) {
        let c = match q {
            Some(q) => limit_coefficient(f, q, u).unwrap_or(f64::NAN),
            None => 0.0,
        };
        ((f.ln_f(u) + two_ln_scale).exp(), c)
    } else {
        // same continuation past the domain edge as the integrator
        edge_terms(f, q, two_ln_scale)
    };
    let res = uxx + radial + src + c * ux * ux;
    res.abs() / 1f64.max(uxx.abs()).max(radial.abs())
}

fn residual_at(f: &Nonlinearity, sol: &RadialSolution, two_ln_scale: f64, x: f64, u: f64, ux: f64, uxx: f64) -> f64 {
    let q = match sol.equation {
        Equation::Limit { q } => Some(q),
        Equation::Original => None,
    };
    defect(f, sol.n as f64, two_ln_scale, q, x, u, ux, uxx)
}

/// Maximum residual of the governing equation over the cell midpoints that
/// lie inside the domain of `f`.
pub fn residual_norm(f: &Nonlinearity, sol: &RadialSolution) -> f64 {
    residual_norm_on(f, sol, f64::NEG_INFINITY, f64::INFINITY)
}

/// As [`residual_norm`], restricted to cells whose midpoint radius lies in
/// `[r_lo, r_hi]`.
pub fn residual_norm_on(f: &Nonlinearity, sol: &RadialSolution, r_lo: f64, r_hi: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, k) in sol.cells() {
        let ln_s = sol.segments[k].ln_scale;
        let s = ln_s.exp();
        let a = sol.nodes[i].x;
        let b = sol.nodes[i + 1].x;
        let m = 0.5 * (a + b);
        if m == 0.0 || m * s < r_lo || m * s > r_hi {
            continue;
        }
        let (u, ux, uxx) = sol.cell(i).eval(m);
        if !f.contains(u) {
            // continuation past the domain edge, kept only to bracket the zero
            continue;
        }
        let r = residual_at(f, sol, 2.0 * ln_s, m, u, ux, uxx);
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
        if worst.is_nan() {
            break;
        }
    }
    worst
}

/// `F^{-1}[F(σ) (1 + s²/(4N F(σ)))²]`, the regular solution of the limit
/// equation when `q = q_S`.
pub fn exact_limit_critical(f: &Nonlinearity, n: u32, sigma: f64, s: f64) -> Result<f64> {
    let big = f.big_f(sigma)?;
    critical_formula(f, n, sigma, s, big)
}

/// The same formula with `F(1)` in the inner denominator. It solves the
/// equation only for `σ = 1`; kept for comparison against the corrected form.
pub fn exact_limit_critical_unit(f: &Nonlinearity, n: u32, sigma: f64, s: f64) -> Result<f64> {
    let inner = f.big_f(1.0)?;
    critical_formula(f, n, sigma, s, inner)
}

fn critical_formula(f: &Nonlinearity, n: u32, sigma: f64, s: f64, inner: f64) -> Result<f64> {
    let report = classify(f, n)?;
    if report.regime != Regime::Critical {
        return Err(Error::Regime(format!(
            "the explicit limit solution needs q = q_S = {}, got q = {}",
            report.q_s, report.q
        )));
    }
    let ln_big = f.ln_big_f(sigma)?;
    let bump = s * s / (4.0 * n as f64 * inner);
    f.big_f_inv_ln(ln_big + 2.0 * bump.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_builtin;

    #[test]
    fn series_slope_near_center() {
        let f = make_builtin("exp").unwrap();
        let sol = shoot_regular(&f, 3, 0.0, ShootOptions::new(1e-10, 5.0)).unwrap();
        let r = 1e-3;
        let (_, du) = sol.eval(r).unwrap();
        assert!((du / r + 1.0 / 3.0).abs() < 1e-5);
        // u(0) = 0 means u < 0 for every r > 0
        assert!(sol.first_zero.is_none());
        let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-10, 5.0)).unwrap();
        assert!(sol.first_zero.is_some());
    }

    #[test]
    fn out_of_range_tol_is_rejected() {
        let f = make_builtin("exp").unwrap();
        assert!(shoot_regular(&f, 3, 0.0, ShootOptions::new(1e-3, 5.0)).is_err());
    }
}
