//! Bifurcation diagram `μ(ρ) = r₀(ρ)²` of `Δu + μ f(u) = 0` in the unit ball
//! with zero boundary data, and the singular value `μ* = (r₀*)²`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{classify, Nonlinearity};
use crate::radial_ode::{shoot_regular, ShootOptions, ZeroMode, DEFAULT_TOL};
use crate::singular::{construct_singular, SingularOptions};

/// Upper end of the grid used to find the infimum of `f` on `[0, ∞)`.
const DELTA_PROBE_HI: f64 = 10.0;

/// Continues `f` below zero by a monotone cubic down to `δ/2`, where `δ` is
/// the sampled minimum of `f` on `[0, 10]`; the constant `δ/2` below.
pub fn extend_nonlinearity(f: &Nonlinearity) -> Result<Nonlinearity> {
    if let crate::nonlinearity::Kind::Extended(_) = f.kind() {
        return Ok(f.clone());
    }
    if !f.contains(0.0) {
        return Err(Error::Precondition(format!("{} is not defined at u = 0", f.id())));
    }
    let mut delta = f64::INFINITY;
    for i in 0..=200 {
        let u = DELTA_PROBE_HI * i as f64 / 200.0;
        delta = delta.min(f.f(u));
    }
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("f must be positive on [0, ∞); min f = {delta}")));
    }
    // a cubic from δ/2 with zero slope to f(0) with slope f'(0) is monotone
    // once width · f'(0) <= 3 (f(0) - δ/2)
    let rise = f.f(0.0) - 0.5 * delta;
    let df0 = f.df(0.0);
    let width = if df0 > 0.0 { (3.0 * rise / df0).min(1.0) } else { 1.0 };
    Nonlinearity::extended(f.clone(), delta, width)
}

#[derive(Debug, Clone, Copy)]
pub struct BifurcationOptions {
    pub tol: f64,
    /// Shooting gives up when no zero appears before this radius.
    pub r_max: f64,
    /// Number of 2× shrinks of the bracket around each turning point.
    pub refine_rounds: u32,
}

impl Default for BifurcationOptions {
    fn default() -> Self {
        BifurcationOptions { tol: DEFAULT_TOL, r_max: 1e3, refine_rounds: 2 }
    }
}

fn shoot_opts(o: &BifurcationOptions) -> ShootOptions {
    ShootOptions::new(o.tol, o.r_max).zero_mode(ZeroMode::Stop)
}

/// `(μ, r₀)` with `r₀` the first zero of the regular solution from `ρ`.
pub fn mu_of_rho(f: &Nonlinearity, n: u32, rho: f64, opts: BifurcationOptions) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Constraint(format!("rho must be positive, got {rho}")));
    }
    let sol = shoot_regular(f, n, rho, shoot_opts(&opts))?;
    let r0 = sol.first_zero.ok_or(Error::NoZero { r_max: opts.r_max })?;
    Ok((r0 * r0, r0))
}

/// `(r₀*)²` from the singular solution.
pub fn mu_star(f: &Nonlinearity, n: u32, opts: BifurcationOptions) -> Result<f64> {
    let base = match f.kind() {
        crate::nonlinearity::Kind::Extended(e) => (*e.base).clone(),
        _ => f.clone(),
    };
    let q = classify(&base, n)?.q;
    let sopts = SingularOptions { tol: opts.tol.max(1e-12), r_max: opts.r_max, ..Default::default() };
    let sing = construct_singular(&base, n, q, sopts)?;
    let r0 = sing.r0_star.ok_or(Error::NoZero { r_max: opts.r_max })?;
    Ok(r0 * r0)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSample {
    pub rho: f64,
    pub mu: Option<f64>,
    /// `μ` is computed at `tol/10`; this is its distance to the value at `tol`.
    pub mu_error: Option<f64>,
    pub dmu_drho: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveClass {
    #[serde(rename = "Oscillatory-consistent")]
    OscillatoryConsistent,
    #[serde(rename = "Monotone-consistent")]
    MonotoneConsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct TurningPoint {
    pub rho: f64,
    pub mu: f64,
    /// Whether it is a local maximum of `μ`.
    pub maximum: bool,
    /// The extremum stayed inside the shrunken bracket.
    pub confirmed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BifurcationCurve {
    pub f_id: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub tol: f64,
    pub extension_record: String,
    pub samples: Vec<CurveSample>,
    pub mu_star: Option<f64>,
    pub mu_star_error: Option<String>,
    pub turning_points: Vec<TurningPoint>,
    /// Sign changes of `μ(ρ) - μ*` along the grid, ignoring samples whose
    /// distance to `μ*` is within their error.
    pub crossings: usize,
    /// Neighbouring samples that differ by more than their errors.
    pub resolved_steps: usize,
    pub resolved_decreases: usize,
    /// Neighbouring samples whose difference is below the error estimate,
    /// so that the sign of `dμ/dρ` between them is not determined.
    pub unresolved_steps: usize,
    pub sup_mu: f64,
    pub classification: CurveClass,
}

/// `n` points spaced evenly in `ln ρ` on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Constraint(format!("need 0 < rho_min < rho_max and >= 2 points, got {lo}, {hi}, {n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// `μ` at a tenth of `opts.tol` (floored at 1e-12), with its distance to the
/// value at ten times that tolerance as a conservative error bar; the
/// shooting error is erratic in `tol`, so the looser value is the one
/// measured against.
fn mu_with_error(f: &Nonlinearity, n: u32, rho: f64, opts: BifurcationOptions) -> Result<(f64, f64)> {
    let fine = BifurcationOptions { tol: (0.1 * opts.tol).max(1e-12), ..opts };
    let coarse = BifurcationOptions { tol: 10.0 * fine.tol, ..opts };
    let (mu, _) = mu_of_rho(f, n, rho, fine)?;
    let (mu_c, _) = mu_of_rho(f, n, rho, coarse)?;
    Ok((mu, (mu - mu_c).abs()))
}

/// A grid sample that produced a value: `(index, ρ, μ, error)`.
#[derive(Clone, Copy)]
struct Sampled {
    i: usize,
    rho: f64,
    mu: f64,
    err: f64,
}

/// Global error of a shot relative to its local tolerance; measured up to
/// about 25 on the built-in families, so differences below this multiple
/// of `opts.tol` (the samples use `tol/10`) are not taken as real.
const RESOLUTION_FACTOR: f64 = 10.0;

fn floor(mu: f64, tol: f64) -> f64 {
    RESOLUTION_FACTOR * tol * mu.abs().max(1.0)
}

/// Smallest difference between two samples that is taken as a real change.
fn resolution(a: &Sampled, b: &Sampled, tol: f64) -> f64 {
    (a.err + b.err).max(floor(a.mu.abs().max(b.mu.abs()), tol))
}

/// Samples `μ(ρ)` on `grid` (in parallel), locates turning points and
/// compares against `μ*`.
pub fn sweep_curve(f: &Nonlinearity, n: u32, grid: &[f64], opts: BifurcationOptions) -> Result<BifurcationCurve> {
    if grid.len() < 3 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Constraint("rho grid needs at least three increasing points".into()));
    }
    let ext = extend_nonlinearity(f)?;
    let mus: Vec<std::result::Result<(f64, f64), String>> = grid
        .par_iter()
        .map(|&rho| mu_with_error(&ext, n, rho, opts).map_err(|e| e.to_string()))
        .collect();

    let mut samples: Vec<CurveSample> = grid
        .iter()
        .zip(&mus)
        .map(|(&rho, m)| CurveSample {
            rho,
            mu: m.as_ref().ok().map(|m| m.0),
            mu_error: m.as_ref().ok().map(|m| m.1),
            dmu_drho: None,
            error: m.clone().err(),
        })
        .collect();
    let ok: Vec<Sampled> = samples
        .iter()
        .enumerate()
        .filter_map(|(i, s)| Some(Sampled { i, rho: s.rho, mu: s.mu?, err: s.mu_error? }))
        .collect();
    for j in 0..ok.len() {
        let slope = if j == 0 || j + 1 == ok.len() {
            let (a, b) = if j == 0 { (0, 1) } else { (j - 1, j) };
            ok.get(b).map(|_| (ok[b].mu - ok[a].mu) / (ok[b].rho - ok[a].rho))
        } else {
            let (x0, x1, x2) = (ok[j - 1].rho, ok[j].rho, ok[j + 1].rho);
            let (y0, y1, y2) = (ok[j - 1].mu, ok[j].mu, ok[j + 1].mu);
            let (h0, h1) = (x1 - x0, x2 - x1);
            // three-point derivative on a nonuniform grid
            Some(-h1 / (h0 * (h0 + h1)) * y0 + (h1 - h0) / (h0 * h1) * y1 + h0 / (h1 * (h0 + h1)) * y2)
        };
        samples[ok[j].i].dmu_drho = slope;
    }

    let (mu_star, mu_star_error) = match mu_star(&ext, n, opts) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut resolved_steps = 0;
    let mut resolved_decreases = 0;
    let mut unresolved_steps = 0;
    for w in ok.windows(2) {
        let d = w[1].mu - w[0].mu;
        if d.abs() > resolution(&w[0], &w[1], opts.tol) {
            resolved_steps += 1;
            resolved_decreases += usize::from(d < 0.0);
        } else {
            unresolved_steps += 1;
        }
    }

    let turning_points: Vec<TurningPoint> = extrema(&ok, opts.tol)
        .into_iter()
        .map(|(j, maximum)| {
            let bracket = (ok[j - 1].rho, ok[j].rho, ok[j + 1].rho);
            refine_turning_point(&ext, n, bracket, ok[j].mu, maximum, opts)
        })
        .collect();

    let crossings = match mu_star {
        Some(ms) => {
            let signs: Vec<bool> = ok
                .iter()
                .filter(|s| (s.mu - ms).abs() > (2.0 * s.err).max(floor(ms, opts.tol)))
                .map(|s| s.mu > ms)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        }
        None => 0,
    };
    let complete = ok.len() == grid.len();
    let confirmed = turning_points.iter().filter(|t| t.confirmed).count();
    let classification = if complete && resolved_decreases == 0 && resolved_steps > 0 && turning_points.is_empty() {
        CurveClass::MonotoneConsistent
    } else if confirmed >= 2 && crossings >= 1 {
        CurveClass::OscillatoryConsistent
    } else {
        CurveClass::Inconclusive
    };
    let sup_mu = ok.iter().map(|s| s.mu).fold(f64::NEG_INFINITY, f64::max);
    let extension_record = match ext.kind() {
        crate::nonlinearity::Kind::Extended(e) => format!(
            "f unchanged for u >= 0; monotone cubic on [-{w}, 0] from delta/2 = {d} to f(0); constant {d} below -{w}",
            w = e.width,
            d = 0.5 * e.delta
        ),
        _ => "none".into(),
    };
    Ok(BifurcationCurve {
        f_id: f.id().to_string(),
        n,
        tol: opts.tol,
        extension_record,
        samples,
        mu_star,
        mu_star_error,
        turning_points,
        crossings,
        resolved_steps,
        resolved_decreases,
        unresolved_steps,
        sup_mu,
        classification,
    })
}

/// Interior local extrema of the sampled curve, `(index into ok, is_max)`.
/// A running extremum is reported once the curve has moved away from it by
/// more than the resolution, so noise on a flat stretch does not count.
fn extrema(ok: &[Sampled], tol: f64) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    let (mut lo, mut hi) = (0, 0);
    // None until the first resolved move, then true while rising
    let mut rising: Option<bool> = None;
    for j in 1..ok.len() {
        match rising {
            None => {
                if ok[j].mu > ok[hi].mu {
                    hi = j;
                }
                if ok[j].mu < ok[lo].mu {
                    lo = j;
                }
                if ok[hi].mu - ok[lo].mu > resolution(&ok[hi], &ok[lo], tol) {
                    rising = Some(hi > lo);
                    (lo, hi) = (j, j);
                }
            }
            Some(true) => {
                if ok[j].mu >= ok[hi].mu {
                    hi = j;
                } else if ok[hi].mu - ok[j].mu > resolution(&ok[hi], &ok[j], tol) {
                    if hi > 0 && hi + 1 < ok.len() {
                        out.push((hi, true));
                    }
                    rising = Some(false);
                    lo = j;
                }
            }
            Some(false) => {
                if ok[j].mu <= ok[lo].mu {
                    lo = j;
                } else if ok[j].mu - ok[lo].mu > resolution(&ok[lo], &ok[j], tol) {
                    if lo > 0 && lo + 1 < ok.len() {
                        out.push((lo, false));
                    }
                    rising = Some(true);
                    hi = j;
                }
            }
        }
    }
    out
}

/// Shrinks the bracket `(a, m, b)` around a local extremum of `μ` by halving
/// it `refine_rounds` times; `maximum` selects max versus min.
fn refine_turning_point(
    f: &Nonlinearity,
    n: u32,
    (mut a, mut m, mut b): (f64, f64, f64),
    mut mu_m: f64,
    maximum: bool,
    opts: BifurcationOptions,
) -> TurningPoint {
    let better = |x: f64, y: f64| if maximum { x > y } else { x < y };
    let mut confirmed = true;
    for _ in 0..opts.refine_rounds {
        let (l, r) = (0.5 * (a + m), 0.5 * (m + b));
        let (Ok((mu_l, _)), Ok((mu_r, _))) = (mu_of_rho(f, n, l, opts), mu_of_rho(f, n, r, opts)) else {
            confirmed = false;
            break;
        };
        if better(mu_l, mu_m) && better(mu_l, mu_r) {
            (b, m, mu_m) = (m, l, mu_l);
        } else if better(mu_r, mu_m) {
            (a, m, mu_m) = (m, r, mu_r);
        } else {
            (a, b) = (l, r);
        }
    }
    // the extremum must still beat both ends of the final bracket
    if let (Ok((mu_a, _)), Ok((mu_b, _))) = (mu_of_rho(f, n, a, opts), mu_of_rho(f, n, b, opts)) {
        confirmed &= !better(mu_a, mu_m) && !better(mu_b, mu_m);
    } else {
        confirmed = false;
    }
    TurningPoint { rho: m, mu: mu_m, maximum, confirmed }
}

impl BifurcationCurve {
    /// CSV with header `rho,mu,dmu_drho`; failed samples are left out.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,mu,dmu_drho\n");
        for s in &self.samples {
            if let Some(mu) = s.mu {
                let d = s.dmu_drho.map(|d| format!("{d:.16e}")).unwrap_or_default();
                let _ = writeln!(out, "{:.16e},{mu:.16e},{d}", s.rho);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCheck {
    pub q: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `(N-2)² / (8 (N - 2q))`.
    pub upper: f64,
    pub holds: bool,
}

/// Samples `q ≤ F f' ≤ (N-2)²/(8(N-2q))` on `[0, 10^6]`, the condition under
/// which `μ(ρ)` is increasing.
pub fn monotonicity_preconditions(f: &Nonlinearity, n: u32) -> Result<MonotonicityCheck> {
    let q = classify(f, n)?.q;
    let nf = n as f64;
    let upper = (nf - 2.0).powi(2) / (8.0 * (nf - 2.0 * q));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut probes: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
    probes.extend((1..=50).map(|i| 10f64.powf(1.0 + 0.1 * i as f64)));
    for u in probes {
        if !f.contains(u) {
            continue;
        }
        let phi = f.phi(u)?;
        lo = lo.min(phi);
        hi = hi.max(phi);
    }
    let slack = 1e-10 * q;
    Ok(MonotonicityCheck { q, phi_min: lo, phi_max: hi, upper, holds: lo >= q - slack && hi <= upper + slack })
}
