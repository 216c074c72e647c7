//! Singular solutions `u*(r) = F^{-1}[k^{-1} r² (1 + θ(r))]`.
//!
//! Near `r = 0` the correction `θ` is integrated in `t = ln r` from the
//! fixed point `θ = θ' = 0`; the trajectory is then handed to the direct
//! radial integrator and followed outward to its first zero.

use std::cell::Cell;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::Quintic;
use crate::nonlinearity::{q_jl, q_sobolev, Nonlinearity};
use crate::ode::{self, Control, StepOpts, Stop};
use crate::radial_ode::{self, check_tol, RadialSolution, ShootOptions, DEFAULT_R_MAX};

/// Amount subtracted from the decay rate when `q = q_JL`.
const JL_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct SingularOptions {
    pub tol: f64,
    /// Target for `|F f' - q|` at the starting point.
    pub delta_q: f64,
    /// The inner trajectory must satisfy `|x|, |y| <= eps_box`.
    pub eps_box: f64,
    /// Largest distance in `t` between the start and the switch.
    pub max_span: f64,
    pub r_max: f64,
    /// Start no later than this radius, even when `F f'` is already close
    /// to `q` further out.
    pub r_min: Option<f64>,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions { tol: 1e-10, delta_q: 1e-8, eps_box: 0.1, max_span: 256.0, r_max: DEFAULT_R_MAX, r_min: None }
    }
}

/// Inner grid node: `x = θ(e^t)`, `y = x'`, `dy = y'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaNode {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

/// Why the inner representation was handed over to direct integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SwitchReason {
    /// `u*` reached the lower end of the asymptotic regime of `f`.
    Floor,
    /// `|θ|` or `|θ'|` reached half the box radius.
    ThetaSize,
    /// The switch was capped one unit of `t` below `ln r_max`.
    RMax,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularDiagnostics {
    #[serde(rename = "D")]
    pub d: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// Decay rate of the linearized flow.
    pub mu_decay: f64,
    /// Margin subtracted from the decay rate at `q = q_JL` (zero otherwise).
    pub jl_delta: f64,
    pub phi_gap_at_start: f64,
    /// Whether `phi_gap_at_start <= delta_q` was reached within `max_span`.
    pub gap_target_met: bool,
    pub switch_reason: SwitchReason,
    /// Relative mismatch of inner and outer `u*` at the switch radius.
    pub switch_mismatch: f64,
    pub max_abs_theta: f64,
}

/// Eigenvalues of the linearization at `θ = θ' = 0` and the decay rate.
pub fn linear_diagnostics(n: u32, q: f64) -> (f64, Complex64, Complex64, f64, f64) {
    let b = n as f64 + 2.0 - 4.0 * q;
    let c = 2.0 * n as f64 - 4.0 * q;
    let d = b * b - 4.0 * c;
    let root = Complex64::new(d, 0.0).sqrt();
    let lp = (b + root) / 2.0;
    let lm = (b - root) / 2.0;
    let (mu, delta) = if (q - q_jl(n)).abs() <= 1e-9 {
        (b / 2.0 - JL_DELTA, JL_DELTA)
    } else if q < q_jl(n) {
        ((b - d.max(0.0).sqrt()) / 2.0, 0.0)
    } else {
        (b / 2.0, 0.0)
    };
    (d, lp, lm, mu, delta)
}

#[derive(Debug, Clone)]
pub struct SingularSolution {
    pub f: Nonlinearity,
    pub n: u32,
    pub q: f64,
    pub k: f64,
    pub theta: Vec<ThetaNode>,
    pub t_start: f64,
    pub t_switch: f64,
    /// Direct integration from one unit of `t` below the switch.
    pub outer: RadialSolution,
    pub r0_star: Option<f64>,
    pub diagnostics: SingularDiagnostics,
}

struct Inner<'a> {
    f: &'a Nonlinearity,
    n: f64,
    q: f64,
    ln_k: f64,
    /// Last computed `u`, used as the starting point of the next inversion.
    hint: Cell<f64>,
}

impl Inner<'_> {
    fn ln_w(&self, t: f64, x: f64) -> f64 {
        2.0 * t - self.ln_k + x.ln_1p()
    }

    fn u(&self, t: f64, x: f64) -> Result<f64> {
        if !(x > -1.0) {
            return Err(Error::Domain(x));
        }
        let u = self.f.big_f_inv_ln_from(self.ln_w(t, x), self.hint.get())?;
        self.hint.set(u);
        Ok(u)
    }

    fn dy(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        let u = self.u(t, x).ok()?;
        let phi = self.f.phi(u).ok()?;
        let q = self.q;
        let b = self.n + 2.0 - 4.0 * q;
        let c = 2.0 * self.n - 4.0 * q;
        let s = y + 2.0 * x + 2.0;
        let opx = 1.0 + x;
        let v = -b * y - c * x + q * y * y / opx + (phi - q) * s * s / opx;
        v.is_finite().then_some(v)
    }
}

fn cell_at(theta: &[ThetaNode], t: f64) -> Quintic {
    let i = theta.partition_point(|n| n.t <= t).clamp(1, theta.len() - 1) - 1;
    let a = &theta[i];
    let b = &theta[i + 1];
    Quintic::new(a.t, b.t, (a.x, a.y, a.dy), (b.x, b.y, b.dy))
}

/// `(u, u')` at `r = e^t` from the inner grid.
fn inner_state(inner: &Inner, theta: &[ThetaNode], t: f64) -> Result<(f64, f64)> {
    let (x, y, _) = cell_at(theta, t).eval(t);
    let u = inner.u(t, x)?;
    let a = 2.0 + y / (1.0 + x);
    // u' = -f(u) w a / r with w = F(u)
    let du = -(inner.f.ln_f(u) + inner.ln_w(t, x) - t).exp() * a;
    Ok((u, du))
}

/// Builds `u*` for `q < q_S`.
pub fn construct_singular(f: &Nonlinearity, n: u32, q: f64, opts: SingularOptions) -> Result<SingularSolution> {
    check_tol(opts.tol)?;
    if n < 3 {
        return Err(Error::Constraint(format!("dimension N must be at least 3, got {n}")));
    }
    if !(q >= 1.0) {
        return Err(Error::Constraint(format!("q must be at least 1, got {q}")));
    }
    if q >= q_sobolev(n) - 1e-9 {
        return Err(Error::Regime(format!(
            "the singular solution is built for q < q_S = {}, got q = {q}",
            q_sobolev(n)
        )));
    }
    if !(opts.eps_box > 0.0 && opts.delta_q > 0.0 && opts.max_span >= 2.0 && opts.r_max > 0.0) {
        return Err(Error::Constraint("eps_box, delta_q, r_max must be positive and max_span at least 2".into()));
    }
    let k = 2.0 * n as f64 - 4.0 * q;
    let inner = Inner { f, n: n as f64, q, ln_k: k.ln(), hint: Cell::new(f64::NAN) };
    let (d, lp, lm, mu, jl_delta) = linear_diagnostics(n, q);

    // hand over before u* drops below the floor of the asymptotic regime
    let floor = f.u_c2_floor();
    let t_floor = if f.contains(floor) { 0.5 * (inner.ln_k + f.ln_big_f(floor)?) } else { f64::INFINITY };
    let t_top = opts.r_max.ln() - 1.0;
    let (t_switch, reason) =
        if t_floor <= t_top { (t_floor, SwitchReason::Floor) } else { (t_top, SwitchReason::RMax) };

    let mut start = None;
    let mut j = 0;
    loop {
        let span = 1.0 + 2f64.powi(j);
        if span > opts.max_span {
            break;
        }
        let t = t_switch - span;
        let gap = match inner.u(t, 0.0).and_then(|u| f.phi(u)) {
            Ok(phi) if phi.is_finite() => (phi - q).abs(),
            _ => break,
        };
        start = Some((t, gap));
        if gap <= opts.delta_q {
            break;
        }
        j += 1;
    }
    if let (Some(r_min), Some((t, _))) = (opts.r_min, start) {
        if !(r_min > 0.0) {
            return Err(Error::Constraint(format!("r_min must be positive, got {r_min}")));
        }
        if r_min.ln() < t {
            let t = r_min.ln();
            let phi = inner.u(t, 0.0).and_then(|u| f.phi(u))?;
            start = Some((t, (phi - q).abs()));
        }
    }
    let (t_start, gap) = match start {
        Some(s) => s,
        None => {
            return Err(Error::Constraint(format!(
                "F^-1 cannot be evaluated below t = {}",
                t_switch - 2.0
            )))
        }
    };

    let dy0 = inner.dy(t_start, 0.0, 0.0).ok_or(Error::StepFailure { r: t_start.exp() })?;
    let mut theta = vec![ThetaNode { t: t_start, x: 0.0, y: 0.0, dy: dy0 }];
    let mut exit = None;
    let mut step_opts = StepOpts::with_tol(opts.tol);
    step_opts.h_init = Some(0.05);
    let stop = ode::integrate(
        |t, s: &[f64; 2]| Some([s[1], inner.dy(t, s[0], s[1])?]),
        t_start,
        [0.0, 0.0],
        t_switch,
        &step_opts,
        |s| {
            theta.push(ThetaNode { t: s.x1, x: s.y1[0], y: s.y1[1], dy: s.f1[1] });
            let size = s.y1[0].abs().max(s.y1[1].abs());
            if size > opts.eps_box || (size > 0.5 * opts.eps_box && s.x1 < t_start + 2.0) {
                exit = Some(s.x1);
                Control::Stop
            } else if size > 0.5 * opts.eps_box {
                // θ is no longer small: hand over to direct integration
                Control::Stop
            } else {
                Control::Continue
            }
        },
    );
    let (t_switch, switch_reason) = match stop {
        Stop::Reached => (t_switch, reason),
        Stop::Callback => match exit {
            Some(t) => return Err(Error::BoxExit { t, eps: opts.eps_box }),
            None => (theta[theta.len() - 1].t, SwitchReason::ThetaSize),
        },
        Stop::Underflow { x } | Stop::Domain { x } | Stop::MaxSteps { x } => {
            return Err(Error::StepFailure { r: x.exp() })
        }
    };

    let t_overlap = (t_switch - 1.0).max(t_start);
    let (u_ov, du_ov) = inner_state(&inner, &theta, t_overlap)?;
    let outer = radial_ode::shoot_from(
        f,
        n,
        t_overlap.exp(),
        u_ov,
        du_ov,
        ShootOptions { tol: opts.tol, r_max: opts.r_max, zero: None },
    )?;
    let (u_in, _) = inner_state(&inner, &theta, t_switch)?;
    let (u_out, _) = outer.eval(t_switch.exp())?;

    Ok(SingularSolution {
        f: f.clone(),
        n,
        q,
        k,
        t_start,
        t_switch,
        r0_star: outer.first_zero,
        diagnostics: SingularDiagnostics {
            d,
            lambda_plus: lp,
            lambda_minus: lm,
            mu_decay: mu,
            jl_delta,
            phi_gap_at_start: gap,
            gap_target_met: gap <= opts.delta_q,
            switch_reason,
            switch_mismatch: (u_in - u_out).abs() / u_in.abs().max(1.0),
            max_abs_theta: theta.iter().map(|n| n.x.abs()).fold(0.0, f64::max),
        },
        theta,
        outer,
    })
}

impl SingularSolution {
    fn inner(&self) -> Inner<'_> {
        Inner { f: &self.f, n: self.n as f64, q: self.q, ln_k: self.k.ln(), hint: Cell::new(f64::NAN) }
    }

    pub fn r_start(&self) -> f64 {
        self.t_start.exp()
    }

    pub fn r_switch(&self) -> f64 {
        self.t_switch.exp()
    }

    /// Upper end of the usable range: the first zero, or the end of the outer segment.
    pub fn r_end(&self) -> f64 {
        self.r0_star.unwrap_or_else(|| self.outer.r_max())
    }

    /// `(u*(r), u*'(r))`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let lo = self.r_start();
        let hi = self.outer.r_max();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        if r.ln() <= self.t_switch {
            inner_state(&self.inner(), &self.theta, r.ln().max(self.t_start))
        } else {
            self.outer.eval(r)
        }
    }

    /// `θ(r) = k F(u*(r)) / r² - 1`.
    pub fn theta_at(&self, r: f64) -> Result<f64> {
        let t = r.ln();
        if t >= self.t_start && t <= self.t_switch {
            return Ok(cell_at(&self.theta, t).eval(t).0);
        }
        let (u, _) = self.eval(r)?;
        let ln_big = self.f.ln_big_f(u)?;
        Ok((self.k.ln() + ln_big - 2.0 * t).exp_m1())
    }

    /// Maximum relative residual of the radial equation for `u*` over cell
    /// midpoints in `[r_lo, r_hi]`, inner grid and outer segment combined.
    pub fn residual_on(&self, r_lo: f64, r_hi: f64) -> Result<f64> {
        let inner = self.inner();
        let nf = self.n as f64;
        let mut worst: f64 = 0.0;
        for w in self.theta.windows(2) {
            let tm = 0.5 * (w[0].t + w[1].t);
            let rm = tm.exp();
            if rm < r_lo || rm > r_hi || tm > self.t_switch {
                continue;
            }
            let (x, y, dy) = cell_at(w, tm).eval(tm);
            let u = inner.u(tm, x)?;
            let phi = self.f.phi(u)?;
            let opx = 1.0 + x;
            let a = 2.0 + y / opx;
            let da = dy / opx - y * y / (opx * opx);
            // (r² u'' + (N-1) r u' + r² f) / (f F) in terms of x(t)
            let res = phi * a * a - a * a - da - (nf - 2.0) * a + self.k / opx;
            let scale = 1f64
                .max((phi * a * a).abs())
                .max(a * a)
                .max(da.abs())
                .max(((nf - 2.0) * a).abs())
                .max(self.k / opx);
            worst = worst.max(res.abs() / scale);
        }
        let outer = radial_ode::residual_norm_on(&self.f, &self.outer, r_lo.max(self.r_switch()), r_hi);
        Ok(if outer.is_nan() { f64::NAN } else { worst.max(outer) })
    }

    /// CSV `r,theta,u_star,du_star` on a geometric grid with ratio `10^{1/32}`.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("r,theta,u_star,du_star\n");
        let ratio = 10f64.powf(1.0 / 32.0);
        let end = self.r_end();
        let mut j = 0;
        loop {
            let r = self.r_start() * ratio.powi(j);
            if r > end {
                break;
            }
            let (u, du) = self.eval(r)?;
            let th = self.theta_at(r)?;
            let _ = writeln!(out, "{r:.16e},{th:.16e},{u:.16e},{du:.16e}");
            j += 1;
        }
        Ok(out)
    }
}

/// `v*(s) = F^{-1}[k^{-1} s²]`, the exact singular solution of the limit equation.
pub fn exact_singular_limit(f: &Nonlinearity, n: u32, q: f64, s: f64) -> Result<f64> {
    let k = 2.0 * n as f64 - 4.0 * q;
    if !(k > 0.0) {
        return Err(Error::Regime(format!("k = 2N - 4q must be positive, got {k}")));
    }
    if !(s > 0.0) {
        return Err(Error::Constraint(format!("s must be positive, got {s}")));
    }
    f.big_f_inv_ln(2.0 * s.ln() - k.ln())
}
