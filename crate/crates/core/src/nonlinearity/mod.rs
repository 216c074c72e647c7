//! Nonlinearities `f`, the integral `F(u) = ∫_u^∞ dt/f(t)` and its inverse.

mod exponents;
mod families;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermite::Quintic;
use crate::quad;

pub use exponents::{
    check_superlinearity, classify, estimate_q, p_jl, p_sobolev, q_jl, q_sobolev, ExponentReport,
    QEstimate, QMethod, Regime, SuperlinearityReport,
};

/// Whether `f` lives on `[0, ∞)` with `f(0) = 0` (`F11`) or is positive on
/// the whole domain that is used (`F12`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DomainClass {
    F11,
    F12,
}

/// Lower end of the domain of `f`; the domain is unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub inclusive: bool,
}

impl Domain {
    pub const REALS: Domain = Domain { lo: f64::NEG_INFINITY, inclusive: false };

    pub fn contains(&self, u: f64) -> bool {
        u > self.lo || (self.inclusive && u == self.lo)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied nonlinearity given by closures for `f`, `f'` and `f''`.
#[derive(Clone)]
pub struct Custom {
    pub name: String,
    pub f: ScalarFn,
    pub df: ScalarFn,
    pub d2f: ScalarFn,
    pub big_f: Option<ScalarFn>,
    pub q: Option<f64>,
    pub domain: Domain,
    pub class: DomainClass,
    pub u_c2_floor: f64,
}

impl fmt::Debug for Custom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Custom")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// `f` continued below `u = 0`: a monotone cubic on `[-width, 0]` joining
/// `delta / 2` (with zero slope) to `f(0)` (with slope `f'(0)`), and the
/// constant `delta / 2` further left.
#[derive(Debug, Clone)]
pub struct Extension {
    pub base: Arc<Nonlinearity>,
    pub delta: f64,
    pub width: f64,
    cubic: Quintic,
}

impl Extension {
    fn eval(&self, u: f64) -> (f64, f64, f64) {
        if u <= -self.width {
            (0.5 * self.delta, 0.0, 0.0)
        } else {
            self.cubic.eval(u)
        }
    }
}

#[derive(Debug, Clone)]
pub enum Kind {
    Power { p: f64, a: f64 },
    Exponential,
    ExpPower { p: f64 },
    IteratedExp { n: u32 },
    PowerLog { p: f64, gamma: f64, a: f64 },
    Tetration { n: u32, a: f64 },
    Extended(Extension),
    Custom(Custom),
}

/// An immutable nonlinearity; cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    kind: Kind,
    id: String,
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn parse_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse { spec: spec.to_string(), reason: reason.into() }
}

impl Nonlinearity {
    pub fn power(p: f64, a: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Constraint(format!("power requires p > 1, got p = {p}")));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::Constraint(format!("power requires a >= 0, got a = {a}")));
        }
        let id = format!("power:p={},a={}", fmt_num(p), fmt_num(a));
        Ok(Nonlinearity { kind: Kind::Power { p, a }, id })
    }

    pub fn exponential() -> Self {
        Nonlinearity { kind: Kind::Exponential, id: "exp".into() }
    }

    pub fn exp_power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Constraint(format!("exppow requires p >= 1, got p = {p}")));
        }
        Ok(Nonlinearity { kind: Kind::ExpPower { p }, id: format!("exppow:p={}", fmt_num(p)) })
    }

    pub fn iterated_exp(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Constraint(format!("iterexp requires n >= 2, got n = {n}")));
        }
        Ok(Nonlinearity { kind: Kind::IteratedExp { n }, id: format!("iterexp:n={n}") })
    }

    pub fn power_log(p: f64, gamma: f64, a: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Constraint(format!("powlog requires p > 1, got p = {p}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Constraint(format!("powlog requires gamma >= 0, got gamma = {gamma}")));
        }
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::Constraint(format!("powlog requires a > 1, got a = {a}")));
        }
        let id = format!("powlog:p={},gamma={},a={}", fmt_num(p), fmt_num(gamma), fmt_num(a));
        Ok(Nonlinearity { kind: Kind::PowerLog { p, gamma, a }, id })
    }

    pub fn tetration(n: u32, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Constraint(format!("tetration requires n >= 2, got n = {n}")));
        }
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::Constraint(format!("tetration requires a > 1, got a = {a}")));
        }
        let id = format!("tetration:n={n},a={}", fmt_num(a));
        Ok(Nonlinearity { kind: Kind::Tetration { n, a }, id })
    }

    pub fn custom(c: Custom) -> Self {
        let id = c.name.clone();
        Nonlinearity { kind: Kind::Custom(c), id }
    }

    /// Continues `base` below zero (see [`Extension`]).
    pub fn extended(base: Nonlinearity, delta: f64, width: f64) -> Result<Self> {
        let f0 = base.f(0.0);
        let df0 = base.df(0.0);
        if !(f0 > 0.0) {
            return Err(Error::Constraint(format!("f(0) = {f0} must be positive to extend f below 0")));
        }
        if !(delta > 0.0) || !(width > 0.0) {
            return Err(Error::Constraint("extension needs delta > 0 and width > 0".into()));
        }
        // cubic c(t), t in [0, 1], with c(0) = delta/2, c'(0) = 0, c(1) = f0,
        // c'(1) = h f'(0); stored as a quintic cell with matching c''
        let h = width;
        let d = f0 - 0.5 * delta;
        let c2 = 3.0 * d - h * df0;
        let c3 = h * df0 - 2.0 * d;
        let dd_left = 2.0 * c2 / (h * h);
        let dd_right = (2.0 * c2 + 6.0 * c3) / (h * h);
        let cubic = Quintic::new(-h, 0.0, (0.5 * delta, 0.0, dd_left), (f0, df0, dd_right));
        let id = format!("{}+ext(delta={},width={})", base.id, fmt_num(delta), fmt_num(width));
        let ext = Extension { base: Arc::new(base), delta, width, cubic };
        Ok(Nonlinearity { kind: Kind::Extended(ext), id })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Canonical spec string (or the custom name).
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Domain {
        match &self.kind {
            Kind::Power { a, .. } => Domain { lo: -a, inclusive: *a == 0.0 },
            Kind::Exponential | Kind::IteratedExp { .. } | Kind::Extended(_) => Domain::REALS,
            Kind::ExpPower { .. } | Kind::Tetration { .. } => Domain { lo: 0.0, inclusive: true },
            Kind::PowerLog { a, .. } => Domain { lo: 1.0 - a, inclusive: false },
            Kind::Custom(c) => c.domain,
        }
    }

    pub fn domain_class(&self) -> DomainClass {
        match &self.kind {
            Kind::Power { a, .. } if *a == 0.0 => DomainClass::F11,
            Kind::Custom(c) => c.class,
            _ => DomainClass::F12,
        }
    }

    pub fn q_analytic(&self) -> Option<f64> {
        match &self.kind {
            Kind::Power { p, .. } | Kind::PowerLog { p, .. } => Some(p / (p - 1.0)),
            Kind::Exponential | Kind::ExpPower { .. } | Kind::IteratedExp { .. } | Kind::Tetration { .. } => {
                Some(1.0)
            }
            Kind::Extended(e) => e.base.q_analytic(),
            Kind::Custom(c) => c.q,
        }
    }

    pub fn u_c2_floor(&self) -> f64 {
        match &self.kind {
            Kind::PowerLog { .. } => 0.0,
            Kind::Extended(e) => e.base.u_c2_floor(),
            Kind::Custom(c) => c.u_c2_floor,
            _ => 1.0,
        }
    }

    /// True when `F` is evaluated from a closed form.
    pub fn has_closed_big_f(&self) -> bool {
        match &self.kind {
            Kind::Power { .. } | Kind::Exponential => true,
            Kind::Custom(c) => c.big_f.is_some(),
            _ => false,
        }
    }

    /// True when `F f' ≡ q` identically, so the limit equation coincides
    /// with the original one.
    pub fn is_scale_invariant(&self) -> bool {
        matches!(self.kind, Kind::Power { .. } | Kind::Exponential)
    }

    pub fn contains(&self, u: f64) -> bool {
        self.domain().contains(u)
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        if self.contains(u) && !u.is_nan() {
            Ok(())
        } else {
            Err(Error::Domain(u))
        }
    }

    /// `(L, L', L'')` with `L = ln f`.
    pub fn log_derivs(&self, u: f64) -> (f64, f64, f64) {
        match &self.kind {
            Kind::Power { p, a } => {
                let v = u + a;
                (p * v.ln(), p / v, -p / (v * v))
            }
            Kind::Exponential => (u, 1.0, 0.0),
            Kind::ExpPower { p } => families::exppow(*p, u),
            Kind::IteratedExp { n } => families::iterexp(*n, u),
            Kind::PowerLog { p, gamma, a } => families::powlog(*p, *gamma, u + a),
            Kind::Tetration { n, a } => families::tetration(*n, u + a),
            Kind::Extended(e) => {
                if u >= 0.0 {
                    e.base.log_derivs(u)
                } else {
                    let (f, d, dd) = e.eval(u);
                    let l1 = d / f;
                    (f.ln(), l1, dd / f - l1 * l1)
                }
            }
            Kind::Custom(c) => {
                let f = (c.f)(u);
                let l1 = (c.df)(u) / f;
                (f.ln(), l1, (c.d2f)(u) / f - l1 * l1)
            }
        }
    }

    pub fn ln_f(&self, u: f64) -> f64 {
        self.log_derivs(u).0
    }

    /// `L(u + s) - L(u)` for `s >= 0`, computed without cancellation.
    pub fn delta_ln_f(&self, u: f64, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Power { p, a } => p * (s / (u + a)).ln_1p(),
            Kind::Exponential => s,
            Kind::ExpPower { p } => families::exppow_delta(*p, u, s),
            Kind::IteratedExp { n } => families::iterexp_delta(*n, u, s),
            Kind::PowerLog { p, gamma, a } => families::powlog_delta(*p, *gamma, u + a, s),
            Kind::Tetration { n, a } => families::tetration_delta(*n, u + a, s),
            Kind::Extended(e) => {
                if u >= 0.0 {
                    e.base.delta_ln_f(u, s)
                } else {
                    self.ln_f(u + s) - self.ln_f(u)
                }
            }
            Kind::Custom(_) => self.ln_f(u + s) - self.ln_f(u),
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Power { p, a } => (u + a).powf(*p),
            Kind::Exponential => u.exp(),
            Kind::Extended(e) if u < 0.0 => e.eval(u).0,
            Kind::Extended(e) => e.base.f(u),
            Kind::Custom(c) => (c.f)(u),
            _ => self.ln_f(u).exp(),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Power { p, a } => p * (u + a).powf(p - 1.0),
            Kind::Exponential => u.exp(),
            Kind::Extended(e) if u < 0.0 => e.eval(u).1,
            Kind::Extended(e) => e.base.df(u),
            Kind::Custom(c) => (c.df)(u),
            _ => {
                let (l, d, _) = self.log_derivs(u);
                l.exp() * d
            }
        }
    }

    pub fn d2f(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Power { p, a } => p * (p - 1.0) * (u + a).powf(p - 2.0),
            Kind::Exponential => u.exp(),
            Kind::Extended(e) if u < 0.0 => e.eval(u).2,
            Kind::Extended(e) => e.base.d2f(u),
            Kind::Custom(c) => (c.d2f)(u),
            _ => {
                let (l, d, dd) = self.log_derivs(u);
                l.exp() * (dd + d * d)
            }
        }
    }

    /// `f'^2 / (f f'')`, the local version of `q`.
    pub fn growth_ratio(&self, u: f64) -> f64 {
        let (_, d, dd) = self.log_derivs(u);
        1.0 / (1.0 + dd / d / d)
    }

    /// `ln F(u)` together with `Φ(u) = F(u) f'(u)`.
    pub fn ln_big_f_and_phi(&self, u: f64) -> Result<(f64, f64)> {
        self.check_domain(u)?;
        match &self.kind {
            Kind::Power { p, a } => {
                let v = u + a;
                Ok(((1.0 - p) * v.ln() - (p - 1.0).ln(), p / (p - 1.0)))
            }
            Kind::Exponential => Ok((-u, 1.0)),
            Kind::Custom(c) if c.big_f.is_some() => {
                let big = (c.big_f.as_ref().unwrap())(u);
                Ok((big.ln(), big * (c.df)(u)))
            }
            Kind::Extended(e) if u < 0.0 => {
                let f0 = e.base.big_f(0.0)?;
                let r = quad::integrate(|t| 1.0 / self.f(t), u, 0.0, 1e-14, 0.0, 2000);
                if !r.converged {
                    return Err(Error::Quadrature { reached: u, residual: r.error });
                }
                let big = f0 + r.value;
                Ok((big.ln(), big * self.df(u)))
            }
            _ => self.numeric_ln_big_f(u),
        }
    }

    /// Numeric `F` through `F(u) = h e^{-L(u)} ∫_0^∞ exp(-[L(u + σh) - L(u)]) dσ`
    /// with `h` the local log-scale of `f`, integrated over doubling
    /// segments and closed with the tail `q̂ / f'(T)`.
    fn numeric_ln_big_f(&self, u: f64) -> Result<(f64, f64)> {
        let (l0, d0, _) = self.log_derivs(u);
        if !l0.is_finite() || !d0.is_finite() {
            return Ok((f64::NEG_INFINITY, self.q_analytic().unwrap_or(1.0)));
        }
        let h = 1.0 / d0.max(1.0 / (1.0 + u.abs()));
        let integrand = |sig: f64| {
            let d = self.delta_ln_f(u, sig * h);
            if d.is_nan() {
                0.0
            } else {
                (-d).exp()
            }
        };
        let mut lo = 0.0;
        let mut hi = 32.0;
        let mut body = 0.0;
        let mut prev_total = f64::NAN;
        for _ in 0..80 {
            let r = quad::integrate(integrand, lo, hi, 1e-14, 1e-16 * body, 4000);
            if !r.converged {
                return Err(Error::Quadrature { reached: u + hi * h, residual: r.error });
            }
            body += r.value;
            let x = u + hi * h;
            let decay = integrand(hi);
            let tail = if decay < 1e-18 * body {
                0.0
            } else {
                let (_, dx, ddx) = self.log_derivs(x);
                let qh = self.q_analytic().unwrap_or_else(|| 1.0 / (1.0 + ddx / dx / dx));
                qh * decay / (h * dx)
            };
            let total = body + tail;
            if tail == 0.0 || (total - prev_total).abs() <= 1e-12 * total {
                return Ok((h.ln() - l0 + total.ln(), h * d0 * total));
            }
            prev_total = total;
            lo = hi;
            hi *= 2.0;
        }
        Err(Error::Quadrature { reached: u + lo * h, residual: prev_total })
    }

    pub fn ln_big_f(&self, u: f64) -> Result<f64> {
        Ok(self.ln_big_f_and_phi(u)?.0)
    }

    /// `F(u) = ∫_u^∞ dt / f(t)`.
    pub fn big_f(&self, u: f64) -> Result<f64> {
        Ok(self.ln_big_f(u)?.exp())
    }

    /// `Φ(u) = F(u) f'(u)`, which tends to `q`.
    pub fn phi(&self, u: f64) -> Result<f64> {
        Ok(self.ln_big_f_and_phi(u)?.1)
    }

    /// `F^{-1}(w)` for `w > 0`.
    pub fn big_f_inv(&self, w: f64) -> Result<f64> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Bracketing { target: w });
        }
        self.big_f_inv_ln(w.ln())
    }

    /// `F^{-1}(e^{ln_w})`; works for targets whose exponential under- or
    /// overflows.
    pub fn big_f_inv_ln(&self, ln_w: f64) -> Result<f64> {
        if !ln_w.is_finite() {
            return Err(Error::Bracketing { target: ln_w.exp() });
        }
        match &self.kind {
            Kind::Power { p, a } => {
                let v = ((ln_w + (p - 1.0).ln()) / (1.0 - p)).exp();
                return Ok(v - a);
            }
            Kind::Exponential => return Ok(-ln_w),
            _ => {}
        }
        let dom = self.domain();
        let mut x0 = self.u_c2_floor().max(1.0);
        if !dom.contains(x0) {
            x0 = dom.lo + 1.0;
        }
        self.invert_ln_big_f(ln_w, x0)
    }

    /// As [`Nonlinearity::big_f_inv_ln`], starting the search at `hint`.
    pub fn big_f_inv_ln_from(&self, ln_w: f64, hint: f64) -> Result<f64> {
        if !self.has_closed_big_f() && hint.is_finite() && self.contains(hint) && ln_w.is_finite() {
            self.invert_ln_big_f(ln_w, hint)
        } else {
            self.big_f_inv_ln(ln_w)
        }
    }

    fn invert_ln_big_f(&self, ln_w: f64, x0: f64) -> Result<f64> {
        let out_of_range = || Error::Bracketing { target: ln_w.exp() };
        // g is decreasing; non-finite ln F (overflowed L) counts as "too far right"
        let g = |u: f64| -> Result<(f64, f64)> {
            let (lf, phi) = self.ln_big_f_and_phi(u)?;
            let gv = if lf.is_nan() { f64::NEG_INFINITY } else { lf - ln_w };
            Ok((gv, phi))
        };
        let dom = self.domain();
        let (g0, phi0) = g(x0)?;
        if g0.abs() <= 1e-14 * ln_w.abs().max(1.0) {
            return Ok(x0);
        }
        // first bracketing step from the Newton correction, d ln F / du = -L'/Φ
        let newton0 = (g0 * phi0 / self.log_derivs(x0).1).abs();
        let min_step = 16.0 * f64::EPSILON * x0.abs().max(1e-300);
        let mut step = if newton0.is_finite() && newton0 > 0.0 { newton0.max(min_step) } else { 1.0 };
        let (mut a, mut b);
        if g0 > 0.0 {
            a = x0;
            let mut found = None;
            for _ in 0..200 {
                let x = a + step;
                let (gx, phi) = g(x)?;
                if gx <= 0.0 {
                    found = Some(x);
                    break;
                }
                a = x;
                // ln F is convex, so the Newton correction from the left
                // never passes the root; take twice that or double the step
                let newton = gx * phi / self.log_derivs(x).1;
                step = if newton.is_finite() { (2.0 * step).max(2.0 * newton) } else { 2.0 * step };
            }
            b = found.ok_or_else(out_of_range)?;
        } else {
            b = x0;
            let mut found = None;
            if dom.lo.is_finite() && dom.inclusive {
                let (gl, _) = g(dom.lo)?;
                if gl < 0.0 {
                    return Err(out_of_range());
                }
            }
            for _ in 0..400 {
                let mut x = b - step;
                if dom.lo.is_finite() && x <= dom.lo {
                    x = dom.lo + 0.5 * (b - dom.lo);
                }
                if x == b {
                    break;
                }
                let (gx, _) = g(x)?;
                if gx >= 0.0 {
                    found = Some(x);
                    break;
                }
                b = x;
                step *= 2.0;
            }
            if found.is_none() && dom.inclusive {
                found = Some(dom.lo);
            }
            a = found.ok_or_else(out_of_range)?;
        }
        // safeguarded Newton on [a, b] with g(a) >= 0 >= g(b)
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let (gx, phi) = g(x)?;
            if gx.abs() <= 1e-14 * ln_w.abs().max(1.0) {
                return Ok(x);
            }
            if gx > 0.0 {
                a = x;
            } else {
                b = x;
            }
            if (b - a) <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
            let slope = -self.log_derivs(x).1 / phi;
            let newton = x - gx / slope;
            if (newton - x).abs() <= 2.0 * f64::EPSILON * x.abs() {
                return Ok(newton.clamp(a, b));
            }
            x = if gx.is_finite() && slope.is_finite() && slope < 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
        }
        Ok(x)
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

fn parse_value(spec: &str, key: &str, raw: &str) -> Result<f64> {
    let ok = !raw.is_empty()
        && raw.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    let v: f64 = if ok { raw.parse().map_err(|_| parse_err(spec, format!("bad number `{raw}` for `{key}`")))? } else {
        return Err(parse_err(spec, format!("bad number `{raw}` for `{key}`")));
    };
    Ok(v)
}

fn parse_int(spec: &str, key: &str, raw: &str) -> Result<u32> {
    raw.parse::<u32>()
        .map_err(|_| parse_err(spec, format!("`{key}` must be a non-negative integer, got `{raw}`")))
}

impl FromStr for Nonlinearity {
    type Err = Error;

    /// Grammar: `name[:key=value(,key=value)*]`.
    fn from_str(spec: &str) -> Result<Self> {
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (spec, None),
        };
        let allowed: &[&str] = match name {
            "power" => &["p", "a"],
            "exp" => &[],
            "exppow" => &["p"],
            "iterexp" => &["n"],
            "powlog" => &["p", "gamma", "a"],
            "tetration" => &["n", "a"],
            _ => return Err(parse_err(spec, format!("unknown family `{name}`"))),
        };
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| parse_err(spec, format!("expected key=value, got `{item}`")))?;
                if !allowed.contains(&k) {
                    return Err(parse_err(spec, format!("unknown key `{k}` for `{name}`")));
                }
                if pairs.iter().any(|(pk, _)| *pk == k) {
                    return Err(parse_err(spec, format!("duplicate key `{k}`")));
                }
                pairs.push((k, v));
            }
        }
        let get = |k: &str| pairs.iter().find(|(pk, _)| *pk == k).map(|(_, v)| *v);
        let real = |k: &str| -> Result<f64> {
            let raw = get(k).ok_or_else(|| parse_err(spec, format!("missing key `{k}`")))?;
            parse_value(spec, k, raw)
        };
        let int = |k: &str| -> Result<u32> {
            let raw = get(k).ok_or_else(|| parse_err(spec, format!("missing key `{k}`")))?;
            parse_int(spec, k, raw)
        };
        match name {
            "power" => {
                let a = match get("a") {
                    Some(raw) => parse_value(spec, "a", raw)?,
                    None => 0.0,
                };
                Nonlinearity::power(real("p")?, a)
            }
            "exp" => Ok(Nonlinearity::exponential()),
            "exppow" => Nonlinearity::exp_power(real("p")?),
            "iterexp" => Nonlinearity::iterated_exp(int("n")?),
            "powlog" => Nonlinearity::power_log(real("p")?, real("gamma")?, real("a")?),
            "tetration" => Nonlinearity::tetration(int("n")?, real("a")?),
            _ => unreachable!(),
        }
    }
}

/// Builds a builtin nonlinearity from its spec string.
pub fn make_builtin(spec: &str) -> Result<Nonlinearity> {
    spec.parse()
}
