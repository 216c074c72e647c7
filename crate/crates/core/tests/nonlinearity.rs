use proptest::prelude::*;
use radial_core::nonlinearity::{
    check_superlinearity, classify, estimate_q, q_jl, ExponentReport, QMethod, Regime,
};
use radial_core::{make_builtin, DomainClass, Error, Nonlinearity};

const BUILTINS: &[&str] = &[
    "power:p=5",
    "power:p=6,a=1",
    "exp",
    "exppow:p=2",
    "iterexp:n=2",
    "iterexp:n=3",
    "powlog:p=3,gamma=2,a=2",
    "tetration:n=2,a=2",
    "tetration:n=3,a=2",
];

/// Composite Simpson rule with a fixed number of panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn builtin_metadata() {
    let f = make_builtin("power:p=5").unwrap();
    assert!(f.has_closed_big_f());
    assert_eq!(f.q_analytic(), Some(1.25));
    assert_eq!(f.domain_class(), DomainClass::F11);
    assert!((f.big_f(1.0).unwrap() - 0.25).abs() < 1e-16);

    let e = make_builtin("exp").unwrap();
    assert!(e.has_closed_big_f());
    assert_eq!(e.q_analytic(), Some(1.0));
    assert!((e.big_f(2.0).unwrap() - (-2f64).exp()).abs() < 1e-17);

    let pl = make_builtin("powlog:p=3,gamma=2,a=2").unwrap();
    assert!(!pl.has_closed_big_f());
    assert_eq!(pl.q_analytic(), Some(1.5));
    assert_eq!(pl.u_c2_floor(), 0.0);
    assert_eq!(pl.domain_class(), DomainClass::F12);
    assert_eq!(make_builtin("tetration:n=2,a=2").unwrap().q_analytic(), Some(1.0));
    assert_eq!(make_builtin("iterexp:n=3").unwrap().q_analytic(), Some(1.0));
}

#[test]
fn exppow_f_matches_brute_force() {
    let f = make_builtin("exppow:p=2").unwrap();
    let oracle = simpson(|t| (-t * t).exp(), 3.0, 13.0, 1_000_000);
    let got = f.big_f(3.0).unwrap();
    assert!((got - oracle).abs() <= 1e-9 * oracle, "{got} vs {oracle}");
    let back = f.big_f_inv(got).unwrap();
    assert!((back - 3.0).abs() < 1e-9);
}

#[test]
fn powlog_f_matches_brute_force() {
    let f = make_builtin("powlog:p=3,gamma=2,a=2").unwrap();
    // substitute t = 1/x on (0, 1/u+a] to get a finite range
    let g = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        let v = 1.0 / x;
        1.0 / (v.powi(3) * v.ln().powi(2)) / (x * x)
    };
    for &u in &[0.0, 1.0, 5.0] {
        let oracle = simpson(g, 0.0, 1.0 / (u + 2.0), 1_000_000);
        let got = f.big_f(u).unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle, "u={u}: {got} vs {oracle}");
    }
}

#[test]
fn closed_forms_agree_with_numeric_route() {
    // the same functions through the custom (closure) path use quadrature
    for &(p, a) in &[(5.0, 0.0), (3.0, 1.0), (1.5, 2.0)] {
        let closed = Nonlinearity::power(p, a).unwrap();
        let custom = Nonlinearity::custom(radial_core::nonlinearity::Custom {
            name: "custom-power".into(),
            f: std::sync::Arc::new(move |u: f64| (u + a).powf(p)),
            df: std::sync::Arc::new(move |u: f64| p * (u + a).powf(p - 1.0)),
            d2f: std::sync::Arc::new(move |u: f64| p * (p - 1.0) * (u + a).powf(p - 2.0)),
            big_f: None,
            q: Some(p / (p - 1.0)),
            domain: closed.domain(),
            class: closed.domain_class(),
            u_c2_floor: 1.0,
        });
        for &u in &[0.5, 1.0, 7.0, 300.0] {
            let x = closed.big_f(u).unwrap();
            let y = custom.big_f(u).unwrap();
            assert!((x - y).abs() <= 1e-8 * x, "p={p} a={a} u={u}: {x} vs {y}");
        }
    }
}

fn range_top(f: &Nonlinearity) -> f64 {
    let d = f.domain();
    if d.lo.is_finite() && d.inclusive && f.f(d.lo) > 0.0 {
        f.big_f(d.lo).unwrap()
    } else {
        f64::INFINITY
    }
}

#[test]
fn round_trip_on_fifty_targets() {
    for spec in BUILTINS {
        let f = make_builtin(spec).unwrap();
        let top = range_top(&f);
        let mut checked = 0;
        for j in 0..50 {
            let w = 10f64.powf(-8.0 + 12.0 * j as f64 / 49.0);
            if w >= top {
                assert!(matches!(f.big_f_inv(w), Err(Error::Bracketing { .. })), "{spec} w={w}");
                continue;
            }
            let u = f.big_f_inv(w).unwrap_or_else(|e| panic!("{spec} w={w}: {e}"));
            let back = f.big_f(u).unwrap();
            assert!((back - w).abs() <= 1e-10 * w, "{spec} w={w}: F(F^-1(w)) = {back}");
            checked += 1;
        }
        assert!(checked >= 10, "{spec}: only {checked} targets in range");
    }
}

#[test]
fn derivative_identity() {
    for spec in BUILTINS {
        let f = make_builtin(spec).unwrap();
        for j in 0..20 {
            let u = 0.1 + 10f64.powf(-1.0 + 3.0 * j as f64 / 19.0);
            let inv_f = 1.0 / f.f(u);
            if !(inv_f > 1e-250) {
                continue;
            }
            let h = 1e-3 / f.log_derivs(u).1.max(1.0 / (1.0 + u));
            let d = (f.big_f(u + h).unwrap() - f.big_f(u - h).unwrap()) / (2.0 * h);
            assert!((d + inv_f).abs() <= 1e-6 * inv_f, "{spec} u={u}: {d} vs {}", -inv_f);
        }
    }
}

#[test]
fn f_is_positive_and_big_f_decreasing() {
    for spec in BUILTINS {
        let f = make_builtin(spec).unwrap();
        let mut prev = f64::INFINITY;
        for j in 0..40 {
            let u = 0.05 + 10f64.powf(-1.0 + 4.0 * j as f64 / 39.0);
            assert!(f.f(u) > 0.0);
            let lf = f.ln_big_f(u).unwrap();
            if lf == f64::NEG_INFINITY {
                break;
            }
            assert!(lf < prev, "{spec} u={u}");
            prev = lf;
        }
    }
}

#[test]
fn q_estimates() {
    let cases: &[(&str, f64, f64)] = &[
        ("power:p=6", 1.2, 1e-6),
        ("power:p=3,a=1", 1.5, 1e-6),
        ("powlog:p=3,gamma=2,a=2", 1.5, 1e-6),
        ("powlog:p=5,gamma=1,a=3", 1.25, 1e-6),
        ("exppow:p=2", 1.0, 1e-3),
        ("exppow:p=1.5", 1.0, 1e-3),
        ("iterexp:n=2", 1.0, 1e-3),
        ("iterexp:n=3", 1.0, 1e-3),
        ("tetration:n=2,a=2", 1.0, 1e-3),
        ("tetration:n=3,a=2", 1.0, 1e-3),
    ];
    for &(spec, q, tol) in cases {
        let f = make_builtin(spec).unwrap();
        let est = estimate_q(&f).unwrap_or_else(|e| panic!("{spec}: {e}"));
        assert!((est.q - q).abs() <= tol, "{spec}: {} vs {q} ({:?})", est.q, est.method);
        assert!(est.q >= 1.0 - 1e-6);
        assert_eq!(est.ratio_tail.len(), 3);
        for r in &est.ratio_tail {
            assert!((r - q).abs() < 0.05, "{spec}: ratio {r}");
        }
    }
    let est = estimate_q(&make_builtin("powlog:p=3,gamma=2,a=2").unwrap()).unwrap();
    assert_eq!(est.method, QMethod::Richardson);
}

#[test]
fn classify_examples() {
    let r = classify(&make_builtin("exp").unwrap(), 10).unwrap();
    assert_eq!(r.q, 1.0);
    assert_eq!(r.q_jl, 1.0);
    assert_eq!(r.regime, Regime::Stable);
    assert!(r.jl_borderline);

    let r = classify(&make_builtin("exp").unwrap(), 3).unwrap();
    assert_eq!(r.q_s, 1.25);
    assert!((r.q_jl - 0.042_893_2).abs() < 1e-7);
    assert_eq!(r.regime, Regime::Oscillatory);
    assert_eq!(r.k, 2.0);

    let r = classify(&make_builtin("power:p=7,a=1").unwrap(), 11).unwrap();
    assert!((r.q - 7.0 / 6.0).abs() < 1e-15);
    assert!((r.q_jl - 1.168_861).abs() < 1e-6);
    assert_eq!(r.regime, Regime::Stable);
    assert!(!r.jl_borderline);

    let r = classify(&make_builtin("power:p=5").unwrap(), 3).unwrap();
    assert_eq!(r.regime, Regime::Critical);
    let r = classify(&make_builtin("power:p=4").unwrap(), 3).unwrap();
    assert_eq!(r.regime, Regime::OutOfScope);
    assert!(classify(&make_builtin("exp").unwrap(), 2).is_err());
}

#[test]
fn exponent_identities() {
    for n in 3..=30u32 {
        let qj = q_jl(n);
        let lhs = 2.0 * qj * (n as f64 - 2.0 * qj);
        let rhs = (n as f64 - 2.0).powi(2) / 4.0;
        assert!((lhs - rhs).abs() <= 1e-10, "N={n}");
        // below N = 10 no q >= 1 can be stable
        if n <= 9 {
            assert!(qj < 1.0);
        }
    }
    for &p in &[1.5, 3.0, 5.0, 6.0, 7.0, 11.0] {
        for n in 3..=12u32 {
            let q = p / (p - 1.0);
            let r = ExponentReport::new(n, q);
            assert!((1.0 / r.p + 1.0 / r.q - 1.0).abs() <= 1e-12);
            let lhs = r.k / (p - 1.0);
            let rhs = (2.0 / (p - 1.0)) * (n as f64 - 2.0 - 2.0 / (p - 1.0));
            assert!((lhs - rhs).abs() <= 1e-12);
            if r.q < n as f64 / 2.0 {
                assert!(r.k > 0.0);
            }
        }
    }
    let json = serde_json::to_value(ExponentReport::new(3, 1.0)).unwrap();
    assert_eq!(json["p"], "inf");
    assert_eq!(json["regime"], "Oscillatory");
}

#[test]
fn superlinearity_examples() {
    let r = check_superlinearity(&make_builtin("power:p=6").unwrap(), 3, 1e3, 10.0).unwrap();
    assert!(r.passed, "{r:?}");
    let r = check_superlinearity(&make_builtin("exp").unwrap(), 3, 10.0, 5.0).unwrap();
    assert!(r.passed, "{r:?}");
    let r = check_superlinearity(&make_builtin("power:p=4").unwrap(), 3, 1.0, 0.0).unwrap();
    assert!(!r.passed);
    assert!((r.samples[0].1 - 5.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_round_trip(p in 1.1f64..12.0, a in 0.0f64..5.0, lw in -15.0f64..8.0) {
        let f = Nonlinearity::power(p, a).unwrap();
        let w = lw.exp();
        // preimage offset from the domain edge must survive rounding
        let offset = ((p - 1.0) * w).powf(-1.0 / (p - 1.0));
        if w < range_top(&f) && offset > 1e-6 * (1.0 + a) {
            let u = f.big_f_inv(w).unwrap();
            let back = f.big_f(u).unwrap();
            prop_assert!((back - w).abs() <= 1e-10 * w);
        }
    }

    #[test]
    fn exppow_round_trip(p in 1.0f64..3.0, u in 0.0f64..6.0) {
        let f = Nonlinearity::exp_power(p).unwrap();
        let w = f.big_f(u).unwrap();
        let back = f.big_f_inv(w).unwrap();
        prop_assert!((back - u).abs() <= 1e-8 * u.max(1.0));
    }

    #[test]
    fn regime_is_consistent_with_thresholds(n in 3u32..40, q in 1.0f64..11.0) {
        let r = ExponentReport::new(n, q);
        match r.regime {
            Regime::Oscillatory => prop_assert!(r.q_jl < q && q < r.q_s),
            Regime::Stable => prop_assert!(q <= r.q_jl + 1e-9),
            Regime::Critical => prop_assert!((q - r.q_s).abs() <= 1e-9),
            Regime::OutOfScope => prop_assert!(q > r.q_s),
        }
    }
}
