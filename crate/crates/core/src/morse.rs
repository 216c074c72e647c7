//! Morse-index diagnostics for the singular solution: the Hardy threshold
//! test on `c* = lim r² f'(u*(r))` and Sturm zero counting of the
//! linearized equation `ψ'' + (N-1)/r ψ' + f'(u*) ψ = 0` near `r = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{classify, Nonlinearity, Regime};
use crate::ode::{self, Control, StepOpts, Stop};
use crate::singular::{construct_singular, SingularOptions, SingularSolution};

/// Radii at which the zeros of the linearized solution are counted.
pub const EPS_LADDER: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Relative width of the band around the Hardy constant treated as borderline.
pub const VERDICT_TOL: f64 = 1e-3;

const LINEAR_TOL: f64 = 1e-10;

/// Longest step in `t = ln r`, well below the oscillation period `2π/√(c* - hardy)`
/// for the configurations of interest.
const H_MAX: f64 = 0.5;

/// `(N - 2)² / 4`.
pub fn hardy(n: u32) -> f64 {
    let m = n as f64 - 2.0;
    0.25 * m * m
}

/// `2q(N - 2q)`, the value of `c*` predicted by the singular asymptotics.
pub fn c_star_identity(n: u32, q: f64) -> f64 {
    2.0 * q * (n as f64 - 2.0 * q)
}

/// `r² f'(u*(r))`. Inside the asymptotic representation this is
/// `F f'(u*) k / (1 + θ)`, which avoids the product of a huge and a tiny number.
pub fn potential(sing: &SingularSolution, r: f64) -> Result<f64> {
    let (u, _) = sing.eval(r)?;
    if r.ln() <= sing.t_switch {
        let theta = sing.theta_at(r)?;
        Ok(sing.f.phi(u)? * sing.k / (1.0 + theta))
    } else {
        Ok(r * r * sing.f.df(u))
    }
}

/// Number of interior zeros on `(eps, R)` of the solution of the linearized
/// equation with `ψ(R) = 0`, `ψ'(R) = -1`, where `R` is the first zero `r₀*`
/// of `u*`, or the end of its computed range when `u*` stays positive.
pub fn linearized_zero_count(sing: &SingularSolution, eps: f64) -> Result<usize> {
    let r0 = sing.r_end();
    if !(eps > 0.0 && eps < 0.5 * r0) {
        return Err(Error::Constraint(format!("eps must lie in (0, R/2) = (0, {}), got {eps}", 0.5 * r0)));
    }
    if eps < sing.r_start() {
        return Err(Error::OutOfRange { r: eps, lo: sing.r_start(), hi: r0 });
    }
    let nf = sing.n as f64;
    let mut opts = StepOpts::with_tol(LINEAR_TOL);
    opts.h_max = H_MAX;
    // in t = ln r: ψ_tt + (N-2) ψ_t + r² f'(u*) ψ = 0, ψ_t = r ψ'
    let mut last_sign = 0.0;
    let mut count = 0;
    let stop = ode::integrate(
        |t, y: &[f64; 2]| {
            let c = potential(sing, t.exp().min(r0)).ok()?;
            Some([y[1], -(nf - 2.0) * y[1] - c * y[0]])
        },
        r0.ln(),
        [0.0, -r0],
        eps.ln(),
        &opts,
        |s| {
            let sign = s.y1[0].signum();
            if s.y1[0] != 0.0 {
                if last_sign != 0.0 && sign != last_sign {
                    count += 1;
                }
                last_sign = sign;
            }
            Control::Continue
        },
    );
    match stop {
        Stop::Reached => Ok(count),
        Stop::Underflow { x } | Stop::Domain { x } | Stop::MaxSteps { x } => Err(Error::StepFailure { r: x.exp() }),
        Stop::Callback => unreachable!("the callback never stops"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MorseVerdict {
    InfiniteIndexConsistent,
    FiniteIndexConsistent,
    BorderlineInconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroCount {
    pub eps: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseReport {
    pub f_id: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub q: f64,
    /// `r² f'(u*(r))` at the inner end of the singular solution.
    pub c_star: f64,
    /// `2q(N - 2q)`.
    pub c_star_identity: f64,
    pub hardy: f64,
    /// First zero of `u*`, if any.
    pub r0_star: Option<f64>,
    /// Radius where the linearized solution starts from zero.
    pub r_outer: f64,
    pub zero_counts: Vec<ZeroCount>,
    /// `ln 10 · √(c* - hardy) / π` zeros per decade of `r` when `c* > hardy`.
    pub predicted_per_decade: f64,
    pub verdict: MorseVerdict,
    pub regime: Regime,
    /// The verdict matches the exponent classification.
    pub regime_consistent: bool,
}

/// Builds `u*`, compares `c*` with the Hardy constant and counts zeros of the
/// linearized solution down to each radius of [`EPS_LADDER`].
pub fn morse_regime_check(f: &Nonlinearity, n: u32) -> Result<MorseReport> {
    let exponents = classify(f, n)?;
    let q = exponents.q;
    let smallest = EPS_LADDER[EPS_LADDER.len() - 1];
    let sopts = SingularOptions { r_min: Some(0.1 * smallest), ..Default::default() };
    let sing = construct_singular(f, n, q, sopts)?;
    let c_star = potential(&sing, sing.r_start())?;
    let h = hardy(n);
    let band = VERDICT_TOL * h;
    let verdict = if c_star > h + band {
        MorseVerdict::InfiniteIndexConsistent
    } else if c_star < h - band {
        MorseVerdict::FiniteIndexConsistent
    } else {
        MorseVerdict::BorderlineInconclusive
    };
    let expected = match exponents.regime {
        Regime::Oscillatory => Some(MorseVerdict::InfiniteIndexConsistent),
        Regime::Stable if exponents.jl_borderline => Some(MorseVerdict::BorderlineInconclusive),
        Regime::Stable => Some(MorseVerdict::FiniteIndexConsistent),
        Regime::Critical | Regime::OutOfScope => None,
    };
    let zero_counts = EPS_LADDER
        .iter()
        .map(|&eps| Ok(ZeroCount { eps, count: linearized_zero_count(&sing, eps)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(MorseReport {
        f_id: f.id().to_string(),
        n,
        q,
        c_star,
        c_star_identity: c_star_identity(n, q),
        hardy: h,
        r0_star: sing.r0_star,
        r_outer: sing.r_end(),
        zero_counts,
        predicted_per_decade: if c_star > h { 10f64.ln() * (c_star - h).sqrt() / std::f64::consts::PI } else { 0.0 },
        verdict,
        regime: exponents.regime,
        regime_consistent: expected == Some(verdict),
    })
}
