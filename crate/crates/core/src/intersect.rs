//! Intersection counts `#{r ∈ I : u₀(r) = u₁(r)}` between radial profiles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::radial_ode::{shoot_limit, RadialSolution, ShootOptions};
use crate::singular::{exact_singular_limit, SingularSolution};
use crate::transforms::{cole_hopf_forward, ReferenceNonlinearity};

/// A radial profile that can be evaluated on a range of radii.
pub trait Profile {
    /// `(u(r), u'(r))`.
    fn eval(&self, r: f64) -> Result<(f64, f64)>;
    /// Radii where the profile is available.
    fn range(&self) -> (f64, f64);
    /// Natural sample radii inside `[lo, hi]`.
    fn grid(&self, lo: f64, hi: f64) -> Vec<f64>;
    /// `u → ∞` at the left end of the range.
    fn is_singular(&self) -> bool {
        false
    }
}

impl Profile for RadialSolution {
    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        RadialSolution::eval(self, r)
    }

    fn range(&self) -> (f64, f64) {
        (self.r_min(), self.r_max())
    }

    fn grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.radii().into_iter().filter(|r| *r >= lo && *r <= hi).collect()
    }
}

impl Profile for SingularSolution {
    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        SingularSolution::eval(self, r)
    }

    fn range(&self) -> (f64, f64) {
        (self.r_start(), self.r_end())
    }

    fn grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let inner = self.theta.iter().map(|n| n.t.exp()).filter(|r| *r <= self.r_switch());
        let outer = self.outer.radii().into_iter().filter(|r| *r > self.r_switch());
        inner.chain(outer).filter(|r| *r >= lo && *r <= hi).collect()
    }

    fn is_singular(&self) -> bool {
        true
    }
}

/// Nodes per decade used to sample closed-form profiles.
const EXACT_PER_DECADE: f64 = 64.0;

fn geometric(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Vec::new();
    }
    let m = ((hi / lo).log10() * EXACT_PER_DECADE).ceil().max(1.0) as usize;
    (0..=m).map(|i| lo * (hi / lo).powf(i as f64 / m as f64)).collect()
}

/// The exact singular solution `v*(s) = F^{-1}[s²/k]` of the limit equation.
pub struct LimitSingular<'a> {
    pub f: &'a Nonlinearity,
    pub n: u32,
    pub q: f64,
}

impl LimitSingular<'_> {
    fn k(&self) -> f64 {
        2.0 * self.n as f64 - 4.0 * self.q
    }
}

impl Profile for LimitSingular<'_> {
    fn eval(&self, s: f64) -> Result<(f64, f64)> {
        let v = exact_singular_limit(self.f, self.n, self.q, s)?;
        // F(v*) = s²/k gives v*' = -f(v*) 2s/k
        let dv = -(self.f.ln_f(v)).exp() * 2.0 * s / self.k();
        Ok((v, dv))
    }

    fn range(&self) -> (f64, f64) {
        let d = self.f.domain();
        let hi = if d.inclusive {
            match self.f.big_f(d.lo) {
                Ok(big) if big.is_finite() => (self.k() * big).sqrt(),
                _ => f64::INFINITY,
            }
        } else {
            f64::INFINITY
        };
        (1e-100, hi)
    }

    fn grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        geometric(lo.max(1e-100), hi)
    }

    fn is_singular(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntersectOptions {
    /// Right end used for unbounded intervals.
    pub s_max: f64,
    /// Relative width of the refined bracket around each zero.
    pub rel_tol: f64,
    /// `|u₀ - u₁| < tangency · scale` without a sign change is reported as
    /// a near-tangency.
    pub tangency: f64,
    /// Extra sample points per merged grid cell.
    pub subdivide: usize,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        IntersectOptions { s_max: 1e4, rel_tol: 1e-10, tangency: 1e-8, subdivide: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub r: f64,
    /// `|u₀ - u₁|` at the refined point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    /// Requested interval.
    pub interval: (f64, f64),
    /// Interval actually scanned after clipping.
    pub scanned: (f64, f64),
    pub count: usize,
    pub zeros: Vec<Crossing>,
    pub near_tangencies: Vec<f64>,
    /// The scan stopped before the right end of the interval.
    pub truncated: bool,
    /// Smallest `|u₀ - u₁|` over the samples.
    pub min_gap: f64,
}

/// Radius below which the singular profile exceeds the regular one by a
/// margin: `u*(r) ≥ ρ + max(|ρ|, 1)` with `ρ` the regular center value.
fn singular_clip(sing: &dyn Profile, center: f64, lo: f64, hi: f64) -> Result<f64> {
    let level = center + center.abs().max(1.0);
    let above = |r: f64| -> Result<bool> { Ok(sing.eval(r)?.0 >= level) };
    if !above(lo)? {
        return Ok(lo);
    }
    if above(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if above(m.exp())? {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(a.exp())
}

/// Counts transversal crossings of `a` and `b` on `(interval.0, interval.1)`.
pub fn count_intersections(
    a: &dyn Profile,
    b: &dyn Profile,
    interval: (f64, f64),
    opts: IntersectOptions,
) -> Result<IntersectionReport> {
    let (ia, ib) = interval;
    if !(ib > ia) || ia.is_nan() {
        return Err(Error::Constraint(format!("empty interval ({ia}, {ib})")));
    }
    let want_hi = ib.min(opts.s_max);
    let (a_lo, a_hi) = a.range();
    let (b_lo, b_hi) = b.range();
    let mut lo = ia.max(a_lo).max(b_lo);
    let hi = want_hi.min(a_hi).min(b_hi);
    if a.is_singular() != b.is_singular() {
        let (sing, reg) = if a.is_singular() { (a, b) } else { (b, a) };
        let first = lo.max(f64::MIN_POSITIVE);
        let center = reg.eval(first)?.0;
        lo = singular_clip(sing, center, first, hi)?;
    }
    if !(hi > lo) {
        return Err(Error::Constraint(format!("profiles share no radii in ({ia}, {ib})")));
    }
    let truncated = hi < ib;

    let mut pts: Vec<f64> = a.grid(lo, hi);
    pts.extend(b.grid(lo, hi));
    pts.push(lo);
    pts.push(hi);
    pts.retain(|r| r.is_finite() && *r >= lo && *r <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut grid = Vec::with_capacity(pts.len() * opts.subdivide.max(1));
    for w in pts.windows(2) {
        let m = opts.subdivide.max(1);
        for j in 0..m {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
        }
    }
    grid.push(hi);
    // the open interval excludes its ends
    if lo == ia {
        grid.remove(0);
    }
    if hi == ib && grid.len() > 1 {
        grid.pop();
    }

    let diff = |r: f64| -> Result<(f64, f64)> {
        let (u0, _) = a.eval(r)?;
        let (u1, _) = b.eval(r)?;
        Ok((u0 - u1, u0.abs().max(u1.abs()).max(1.0)))
    };
    let samples: Vec<(f64, f64, f64)> =
        grid.iter().map(|&r| diff(r).map(|(d, s)| (r, d, s))).collect::<Result<_>>()?;

    let mut zeros = Vec::new();
    let mut near = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut last: Option<(f64, f64)> = None;
    for (i, &(r, d, scale)) in samples.iter().enumerate() {
        min_gap = min_gap.min(d.abs());
        if i > 0 && i + 1 < samples.len() {
            let (dp, dn) = (samples[i - 1].1, samples[i + 1].1);
            let local_min = d.abs() <= dp.abs() && d.abs() <= dn.abs();
            let same_side = dp != 0.0 && (dp > 0.0) == (dn > 0.0) && (d == 0.0 || (d > 0.0) == (dp > 0.0));
            if local_min && same_side && d.abs() < opts.tangency * scale {
                near.push(r);
            }
        }
        if d == 0.0 {
            continue;
        }
        if let Some((r0, d0)) = last {
            if (d0 > 0.0) != (d > 0.0) {
                zeros.push(refine(&diff, r0, r, d0, opts.rel_tol)?);
            }
        }
        last = Some((r, d));
    }
    Ok(IntersectionReport {
        interval,
        scanned: (lo, hi),
        count: zeros.len(),
        zeros,
        near_tangencies: near,
        truncated,
        min_gap,
    })
}

fn refine(diff: &dyn Fn(f64) -> Result<(f64, f64)>, mut a: f64, mut b: f64, da: f64, rel: f64) -> Result<Crossing> {
    let pos = da > 0.0;
    let mut best = (a, da.abs());
    for _ in 0..200 {
        if b - a <= rel * b.abs() {
            break;
        }
        let m = 0.5 * (a + b);
        let (dm, _) = diff(m)?;
        if dm.abs() < best.1 {
            best = (m, dm.abs());
        }
        if dm == 0.0 {
            return Ok(Crossing { r: m, residual: 0.0 });
        }
        if (dm > 0.0) == pos {
            a = m;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    let (dm, _) = diff(m)?;
    Ok(Crossing { r: m, residual: dm.abs() })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub pass: bool,
    /// `max (w̃(r) - F_q^{-1}[r²/k])` over the grid; negative when the bound
    /// holds with room.
    pub max_violation: f64,
    pub r_at_max: f64,
    /// Smallest sampled `F f' - q` (must be `>= 0`).
    pub min_phi_minus_q: f64,
    pub nodes: usize,
}

/// Slack allowed for roundoff in the sampled `F f' ≥ q` check.
const PHI_SLACK: f64 = 1e-10;

/// Checks `w̃(r) ≤ F_q^{-1}[r²/k]` for the Cole–Hopf image of the limit
/// solution from `σ`, which holds when `q ≤ q_JL` and `F f' ≥ q`.
pub fn comparison_bound_check(f: &Nonlinearity, n: u32, q: f64, sigma: f64, r_max: f64) -> Result<ComparisonReport> {
    let qj = crate::nonlinearity::q_jl(n);
    if !(q <= qj + 1e-9) {
        return Err(Error::Precondition(format!("q = {q} exceeds q_JL = {qj}")));
    }
    let v = shoot_limit(f, n, q, sigma, ShootOptions { r_max, ..ShootOptions::default() })?;
    let mut min_phi = f64::INFINITY;
    let v_lo = v.nodes.iter().map(|p| p.u).filter(|u| f.contains(*u)).fold(sigma, f64::min);
    let mut probes: Vec<f64> = (0..=64).map(|i| v_lo + (sigma - v_lo) * i as f64 / 64.0).collect();
    probes.extend((0..=64).map(|i| sigma.max(1.0) * 10f64.powf(i as f64 / 8.0)));
    for u in probes {
        if !f.contains(u) {
            continue;
        }
        min_phi = min_phi.min(f.phi(u)? - q);
    }
    if min_phi < -PHI_SLACK * q {
        return Err(Error::Precondition(format!("F f' - q = {min_phi:e} < 0 on the sampled range")));
    }
    let w = cole_hopf_forward(f, q, &v)?;
    let reference = ReferenceNonlinearity::new(q)?;
    let k = 2.0 * n as f64 - 4.0 * q;
    let mut worst = f64::NEG_INFINITY;
    let mut r_at = 0.0;
    let mut pass = true;
    for (r, wv, _) in w.rows() {
        if r == 0.0 {
            continue;
        }
        let bound = reference.big_f_inv(r * r / k)?;
        let excess = wv - bound;
        if excess > 1e-9 * bound.abs().max(1.0) {
            pass = false;
        }
        if excess > worst {
            worst = excess;
            r_at = r;
        }
    }
    Ok(ComparisonReport { pass, max_violation: worst, r_at_max: r_at, min_phi_minus_q: min_phi, nodes: w.nodes.len() })
}
