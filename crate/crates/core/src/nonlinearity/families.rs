//! Log-space kernels for the builtin families.
//!
//! Every family is described through `L = ln f`, its first two derivatives
//! and the increment `L(u + s) - L(u)`, which is evaluated without forming
//! `f` itself so that iterated exponentials and tetrations stay finite.

/// `(L, L', L'')` for the n-fold iterated exponential, `f = exp(L)`.
pub(super) fn iterexp(n: u32, u: f64) -> (f64, f64, f64) {
    let mut l = (u, 1.0, 0.0);
    for _ in 1..n {
        let e = l.0.exp();
        l = (e, e * l.1, e * (l.1 * l.1 + l.2));
    }
    l
}

/// `e^l * expm1(d)` without overflow in the intermediate `expm1(d)`.
fn scaled_expm1(l: f64, d: f64) -> f64 {
    if d < 700.0 {
        l.exp() * d.exp_m1()
    } else {
        (l + d + (-(-d).exp()).ln_1p()).exp()
    }
}

pub(super) fn iterexp_delta(n: u32, u: f64, s: f64) -> f64 {
    // d_1 = s, d_n = exp(L_{n-1}(u)) * expm1(d_{n-1})
    let mut d = s;
    let mut l = u;
    for _ in 1..n {
        d = scaled_expm1(l, d);
        l = l.exp();
    }
    d
}

/// `(L, L', L'')` for the n-th tetration of `v = u + a`.
pub(super) fn tetration(n: u32, v: f64) -> (f64, f64, f64) {
    let lv = v.ln();
    let mut l = (lv, 1.0 / v, -1.0 / (v * v));
    for _ in 1..n {
        let fp = l.0.exp();
        let m = l.1 * lv + 1.0 / v;
        let dm = l.2 * lv + l.1 / v - 1.0 / (v * v);
        l = (fp * lv, fp * m, fp * (l.1 * m + dm));
    }
    l
}

pub(super) fn tetration_delta(n: u32, v: f64, s: f64) -> f64 {
    let lv = v.ln();
    let lvs = (v + s).ln();
    let d1 = (s / v).ln_1p();
    let mut d = d1;
    let mut l = lv;
    for _ in 1..n {
        let fp = l.exp();
        d = fp * (d.exp_m1() * lvs + d1);
        l = fp * lv;
    }
    d
}

pub(super) fn exppow(p: f64, u: f64) -> (f64, f64, f64) {
    let l = u.powf(p);
    let dl = if p == 1.0 { 1.0 } else { p * u.powf(p - 1.0) };
    let ddl = if p == 1.0 {
        0.0
    } else if p == 2.0 {
        2.0
    } else {
        p * (p - 1.0) * u.powf(p - 2.0)
    };
    (l, dl, ddl)
}

pub(super) fn exppow_delta(p: f64, u: f64, s: f64) -> f64 {
    if u == 0.0 {
        s.powf(p)
    } else {
        u.powf(p) * (p * (s / u).ln_1p()).exp_m1()
    }
}

pub(super) fn powlog(p: f64, gamma: f64, v: f64) -> (f64, f64, f64) {
    let lv = v.ln();
    if gamma == 0.0 {
        return (p * lv, p / v, -p / (v * v));
    }
    let l = p * lv + gamma * lv.ln();
    let dl = p / v + gamma / (v * lv);
    let ddl = -p / (v * v) - gamma * (lv + 1.0) / (v * v * lv * lv);
    (l, dl, ddl)
}

pub(super) fn powlog_delta(p: f64, gamma: f64, v: f64, s: f64) -> f64 {
    let r = (s / v).ln_1p();
    if gamma == 0.0 {
        p * r
    } else {
        p * r + gamma * (r / v.ln()).ln_1p()
    }
}
