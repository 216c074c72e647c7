use proptest::prelude::*;
use radial_core::radial_ode::{
    exact_limit_critical, residual_norm, shoot_limit, shoot_regular, Equation, RadialSolution, ShootOptions,
};
use radial_core::singular::exact_singular_limit;
use radial_core::transforms::{
    cole_hopf_forward, cole_hopf_inverse, similarity_rescale, tau, verify_cole_hopf, ReferenceNonlinearity,
};
use radial_core::{make_builtin, Error};

fn opts() -> ShootOptions {
    ShootOptions::new(1e-10, 1e2)
}

fn max_dev(a: &RadialSolution, b: &RadialSolution) -> f64 {
    assert_eq!(a.nodes.len(), b.nodes.len());
    a.nodes.iter().zip(&b.nodes).map(|(x, y)| (x.u - y.u).abs() / x.u.abs().max(1.0)).fold(0.0, f64::max)
}

#[test]
fn power_rescaling_gives_the_sigma_two_bubble() {
    let f = make_builtin("power:p=5").unwrap();
    let u = shoot_regular(&f, 3, 1.0, opts()).unwrap();
    let v = similarity_rescale(&f, &u, 4.0).unwrap();
    assert!((v.center_value - 2.0).abs() < 1e-12);
    assert_eq!(v.equation, Equation::Limit { q: 1.25 });
    for s in [0.01f64, 0.1, 0.5, 1.0, 3.0, 20.0] {
        let exact = 2.0 / (1.0 + 16.0 * s * s / 3.0).sqrt();
        let (got, _) = v.eval(s).unwrap();
        assert!((got - exact).abs() < 1e-8, "s={s}: {got} vs {exact}");
        let crit = exact_limit_critical(&f, 3, 2.0, s).unwrap();
        assert!((crit - exact).abs() < 1e-12);
    }
    // derivative by the chain rule against d/ds of the closed form
    let s: f64 = 0.7;
    let exact_ds = -2.0 * (16.0 * s / 3.0) * (1.0 + 16.0 * s * s / 3.0).powf(-1.5);
    assert!((v.eval(s).unwrap().1 - exact_ds).abs() < 1e-8);
    assert!(residual_norm(&f, &v) <= 1e-8);
}

#[test]
fn exponential_rescaling_is_a_shift() {
    let f = make_builtin("exp").unwrap();
    let u = shoot_regular(&f, 3, 0.0, opts()).unwrap();
    let lambda: f64 = 0.3;
    let v = similarity_rescale(&f, &u, lambda).unwrap();
    for s in [0.1, 1.0, 10.0, 100.0] {
        let expect = u.eval(lambda * s).unwrap().0 + 2.0 * lambda.ln();
        assert!((v.eval(s).unwrap().0 - expect).abs() < 1e-10);
    }
}

#[test]
fn unit_lambda_is_identity() {
    let f = make_builtin("exppow:p=2").unwrap();
    let u = shoot_regular(&f, 3, 1.0, opts()).unwrap();
    let v = similarity_rescale(&f, &u, 1.0).unwrap();
    // nodes past the domain edge are dropped, the rest are untouched
    let m = v.nodes.len();
    assert_eq!(v.nodes[..], u.nodes[..m]);
    assert!(u.nodes[m..].iter().all(|n| !f.contains(n.u)));
}

#[test]
fn rescaling_composes() {
    for spec in ["exp", "power:p=5", "power:p=3,a=1"] {
        let f = make_builtin(spec).unwrap();
        let u = shoot_regular(&f, 5, 1.0, opts()).unwrap();
        let two = similarity_rescale(&f, &similarity_rescale(&f, &u, 0.5).unwrap(), 3.0).unwrap();
        let one = similarity_rescale(&f, &u, 1.5).unwrap();
        assert!(max_dev(&one, &two) <= 1e-9, "{spec}");
        assert!((one.ln_scale() - two.ln_scale()).abs() < 1e-12);
    }
}

#[test]
fn rescaling_reports_range_errors() {
    let f = make_builtin("exp").unwrap();
    let u = shoot_regular(&f, 3, 0.0, opts()).unwrap();
    assert!(matches!(similarity_rescale(&f, &u, 0.0), Err(Error::Constraint(_))));
    // for (u+1)^3 the range of F is (0, ∞) on u > -1, and λ^{-2} F(u) stays in it
    let g = make_builtin("power:p=3,a=1").unwrap();
    let w = shoot_regular(&g, 5, 1.0, opts()).unwrap();
    assert!(similarity_rescale(&g, &w, 1e-3).is_ok());
}

#[test]
fn cole_hopf_fixed_points() {
    let f = make_builtin("power:p=5").unwrap();
    let v = shoot_limit(&f, 3, 1.25, 1.0, opts()).unwrap();
    let w = cole_hopf_forward(&f, 1.25, &v).unwrap();
    assert!(max_dev(&v, &w) < 1e-12);
    let e = make_builtin("exp").unwrap();
    let v = shoot_limit(&e, 3, 1.0, 0.0, opts()).unwrap();
    let w = cole_hopf_forward(&e, 1.0, &v).unwrap();
    assert!(max_dev(&v, &w) < 1e-12);
    let back = cole_hopf_inverse(&e, 1.0, &w).unwrap();
    assert!(max_dev(&v, &back) < 1e-12);
}

#[test]
fn shifted_cubic_maps_to_pure_cubic() {
    // F(v) = (v+1)^{-2}/2 = F_q(v+1), so w = v + 1 and τ = 2 at σ = 1
    let f = make_builtin("power:p=3,a=1").unwrap();
    let report = verify_cole_hopf(&f, 5, 1.5, 1.0, ShootOptions::default()).unwrap();
    assert!((report.tau - 2.0).abs() < 1e-12);
    assert!(report.tau_gap < 1e-12);
    assert!(report.residual <= 1e-6, "{}", report.residual);
    let v = shoot_limit(&f, 5, 1.5, 1.0, opts()).unwrap();
    let w = cole_hopf_forward(&f, 1.5, &v).unwrap();
    assert_eq!(w.f_id, make_builtin("power:p=3").unwrap().id());
    for (a, b) in v.nodes.iter().zip(&w.nodes) {
        assert!((b.u - a.u - 1.0).abs() < 1e-12);
    }
    let back = cole_hopf_inverse(&f, 1.5, &w).unwrap();
    assert!(max_dev(&v, &back) <= 1e-9);
}

#[test]
fn critical_power_verification() {
    let f = make_builtin("power:p=5").unwrap();
    let report = verify_cole_hopf(&f, 3, 1.25, 1.0, ShootOptions::default()).unwrap();
    assert_eq!(report.tau, 1.0);
    assert!(report.residual <= 1e-6);
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = g(a) + g(b);
    for i in 1..m {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn gaussian_growth_maps_to_exponential() {
    let f = make_builtin("exppow:p=2").unwrap();
    let big_f1 = simpson(|t| (-t * t).exp(), 1.0, 12.0, 20_000);
    let report = verify_cole_hopf(&f, 3, 1.0, 1.0, ShootOptions::default()).unwrap();
    assert!((report.tau + big_f1.ln()).abs() < 1e-9, "{} vs {}", report.tau, -big_f1.ln());
    assert!(report.tau_gap < 1e-12);
    assert!(report.residual <= 1e-5, "{}", report.residual);
    assert!(report.limit_residual <= 1e-8);
}

#[test]
fn singular_image_maps_back_to_exact_singular_limit() {
    for (spec, n, q) in [("exppow:p=2", 3u32, 1.0), ("power:p=3,a=1", 5, 1.5), ("powlog:p=3,gamma=2,a=2", 5, 1.5)] {
        let f = make_builtin(spec).unwrap();
        let reference = ReferenceNonlinearity::new(q).unwrap();
        let k = 2.0 * n as f64 - 4.0 * q;
        // w*(s) = F_q^{-1}[s²/k] in closed form, with its derivatives
        let samples: Vec<(f64, f64, f64, f64)> = (0..60)
            .map(|i| {
                let s = 0.05 * 1.1f64.powi(i);
                let w = reference.big_f_inv(s * s / k).unwrap();
                let (dw, ddw) = if q == 1.0 {
                    (-2.0 / s, 2.0 / (s * s))
                } else {
                    let e = 2.0 / (reference.p() - 1.0);
                    (-e * w / s, e * (e + 1.0) * w / (s * s))
                };
                (s, w, dw, ddw)
            })
            .take_while(|&(s, ..)| exact_singular_limit(&f, n, q, s).is_ok())
            .collect();
        assert!(samples.len() >= 20, "{spec}");
        let w = RadialSolution::from_samples(&reference.nonlinearity(), n, Equation::Original, &samples, 1e-10).unwrap();
        let v = cole_hopf_inverse(&f, q, &w).unwrap();
        for (node, &(s, ..)) in v.nodes.iter().zip(&samples) {
            let exact = exact_singular_limit(&f, n, q, s).unwrap();
            assert!((node.u - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{spec} s={s}");
        }
    }
}

#[test]
fn tau_is_increasing_in_sigma() {
    for (spec, q) in [("exppow:p=2", 1.0), ("power:p=3,a=1", 1.5), ("iterexp:n=2", 1.0), ("tetration:n=2,a=2", 1.0)] {
        let f = make_builtin(spec).unwrap();
        let taus: Vec<f64> = (0..20).map(|i| tau(&f, q, 0.25 + 0.5 * i as f64).unwrap()).collect();
        assert!(taus.windows(2).all(|w| w[1] > w[0]), "{spec}: {taus:?}");
    }
}

#[test]
fn transforms_preserve_sign_of_differences() {
    let cases = [("exp", 3u32, 0.0, 2.0), ("exppow:p=2", 3, 0.5, 1.5), ("power:p=5", 3, 1.0, 2.0), ("power:p=3,a=1", 5, 1.0, 3.0), ("iterexp:n=2", 3, 0.0, 1.0)];
    for (spec, n, s0, s1) in cases {
        let f = make_builtin(spec).unwrap();
        let q = f.q_analytic().unwrap();
        let a = shoot_limit(&f, n, q, s0, opts()).unwrap();
        let b = shoot_limit(&f, n, q, s1, opts()).unwrap();
        let (ta, tb) = (cole_hopf_forward(&f, q, &a).unwrap(), cole_hopf_forward(&f, q, &b).unwrap());
        let (ra, rb) = (similarity_rescale(&f, &a, 2.0).unwrap(), similarity_rescale(&f, &b, 2.0).unwrap());
        let hi = a.r_max().min(b.r_max()).min(ta.r_max()).min(tb.r_max());
        for i in 1..200 {
            let r = hi * i as f64 / 200.0;
            let d = a.eval(r).unwrap().0 - b.eval(r).unwrap().0;
            if d.abs() < 1e-6 {
                continue;
            }
            let dt = ta.eval(r).unwrap().0 - tb.eval(r).unwrap().0;
            assert_eq!(d > 0.0, dt > 0.0, "{spec} r={r}");
            let dr = ra.eval(r / 2.0).unwrap().0 - rb.eval(r / 2.0).unwrap().0;
            assert_eq!(d > 0.0, dr > 0.0, "{spec} r={r}");
        }
    }
}

proptest! {
    #[test]
    fn reference_inverse_round_trip(q in 1.0f64..3.0, ln_w in -30.0f64..30.0, exp_branch in any::<bool>()) {
        let q = if exp_branch { 1.0 } else { q.max(1.01) };
        let r = ReferenceNonlinearity::new(q).unwrap();
        let w = r.big_f_inv_ln(ln_w).unwrap();
        let back = r.ln_big_f(w).unwrap();
        prop_assert!((back - ln_w).abs() <= 1e-12 * ln_w.abs().max(1.0));
    }
}
