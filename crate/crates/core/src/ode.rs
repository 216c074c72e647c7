//! Embedded Dormand–Prince 5(4) integrator for small fixed-size systems.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepOpts {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepOpts {
    pub fn with_tol(tol: f64) -> Self {
        StepOpts { rtol: tol, atol: tol, h_init: None, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

/// An accepted step with the state and its derivative at both ends.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step<const D: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    pub f0: [f64; D],
    pub f1: [f64; D],
}

/// Verdict of the step callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Control {
    Continue,
    Stop,
    /// Reject the step and retry with half the step size.
    Retry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Reached,
    Callback,
    Underflow { x: f64 },
    Domain { x: f64 },
    MaxSteps { x: f64 },
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        *o += h * s;
    }
    out
}

fn err_norm<const D: usize>(e: &[f64; D], y0: &[f64; D], y1: &[f64; D], o: &StepOpts) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (e[i] / sc).powi(2);
    }
    (s / D as f64).sqrt()
}

fn initial_step<const D: usize, R>(rhs: &mut R, x0: f64, y0: &[f64; D], f0: &[f64; D], dir: f64, o: &StepOpts) -> f64
where
    R: FnMut(f64, &[f64; D]) -> Option<[f64; D]>,
{
    let zero = [0.0; D];
    let d0 = err_norm(y0, &zero, y0, o);
    let d1 = err_norm(f0, &zero, y0, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let h1 = match rhs(x0 + dir * h0, &y1) {
        Some(f1) => {
            let df: [f64; D] = std::array::from_fn(|i| f1[i] - f0[i]);
            let d2 = err_norm(&df, &zero, y0, o) / h0;
            let m = d1.max(d2);
            if m <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / m).powf(0.2)
            }
        }
        None => h0 * 0.1,
    };
    (100.0 * h0).min(h1).min(o.h_max)
}

/// Integrates `y' = rhs(x, y)` from `x0` towards `x_end` (either direction).
///
/// `rhs` returns `None` when the state is outside the model's domain; the
/// step is then rejected and retried with a smaller step. `on_step` sees
/// each step that passed error control and decides whether to keep it.
pub(crate) fn integrate<const D: usize, R, C>(
    mut rhs: R,
    x0: f64,
    y0: [f64; D],
    x_end: f64,
    opts: &StepOpts,
    mut on_step: C,
) -> Stop
where
    R: FnMut(f64, &[f64; D]) -> Option<[f64; D]>,
    C: FnMut(&Step<D>) -> Control,
{
    if x0 == x_end {
        return Stop::Reached;
    }
    let dir = (x_end - x0).signum();
    let mut x = x0;
    let mut y = y0;
    let mut f = match rhs(x, &y) {
        Some(f) => f,
        None => return Stop::Domain { x },
    };
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&mut rhs, x, &y, &f, dir, opts)).abs();
    let mut last_domain = false;
    let mut steps = 0usize;
    let mut rejected_last = false;

    loop {
        if steps >= opts.max_steps {
            return Stop::MaxSteps { x };
        }
        let remaining = (x_end - x) * dir;
        // a remainder at rounding level counts as arrival
        if remaining <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Stop::Reached;
        }
        h = h.min(opts.h_max);
        let mut hit_end = false;
        if h >= remaining {
            h = remaining;
            hit_end = true;
        }
        if h <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
            return if last_domain { Stop::Domain { x } } else { Stop::Underflow { x } };
        }
        let hs = dir * h;

        let trial = (|| {
            let k1 = f;
            let k2 = rhs(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = rhs(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(
                x + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                x + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let x1 = if hit_end { x_end } else { x + hs };
            let k7 = rhs(x1, &y1)?;
            let e = axpy(
                &[0.0; D],
                hs,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            Some((x1, y1, k7, e))
        })();

        let Some((x1, y1, f1, e)) = trial else {
            last_domain = true;
            h *= 0.25;
            rejected_last = true;
            continue;
        };
        let err = err_norm(&e, &y, &y1, opts);
        if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
            last_domain = true;
            h *= 0.25;
            rejected_last = true;
            continue;
        }
        if err <= 1.0 {
            let step = Step { x0: x, x1, y0: y, y1, f0: f, f1 };
            match on_step(&step) {
                Control::Retry => {
                    last_domain = false;
                    h *= 0.5;
                    rejected_last = true;
                    continue;
                }
                Control::Stop => return Stop::Callback,
                Control::Continue => {}
            }
            steps += 1;
            x = x1;
            y = y1;
            f = f1;
            last_domain = false;
            let mut fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h *= fac;
        } else {
            last_domain = false;
            h *= (0.9 * err.powf(-0.2)).max(0.1);
            rejected_last = true;
        }
    }
}
