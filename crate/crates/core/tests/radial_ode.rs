use proptest::prelude::*;
use radial_core::radial_ode::{
    exact_limit_critical, exact_limit_critical_unit, residual_norm, shoot_limit, shoot_regular, Equation,
    RadialSolution, ShootOptions, Termination, ZeroMode,
};
use radial_core::{make_builtin, Error};

fn bubble(r: f64) -> f64 {
    (1.0 + r * r / 3.0).powf(-0.5)
}

fn bubble_error(tol: f64) -> f64 {
    let f = make_builtin("power:p=5").unwrap();
    let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(tol, 10.0)).unwrap();
    (0..=10_000)
        .map(|i| {
            let r = i as f64 * 1e-3;
            (sol.eval(r).unwrap().0 - bubble(r)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn critical_power_matches_bubble() {
    assert!(bubble_error(1e-9) < 1e-6);
    assert!(bubble_error(1e-7) < 1e-6);
}

#[test]
fn residual_stays_within_ten_tol() {
    let f = make_builtin("power:p=5").unwrap();
    for tol in [1e-6, 1e-8, 1e-10] {
        let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(tol, 10.0)).unwrap();
        let res = residual_norm(&f, &sol);
        assert!(res <= 10.0 * tol, "tol {tol}: residual {res}");
    }
    let e = make_builtin("exp").unwrap();
    let sol = shoot_regular(&e, 3, 0.0, ShootOptions::new(1e-10, 5.0)).unwrap();
    assert!(residual_norm(&e, &sol) <= 1e-9);
}

#[test]
fn center_slope_follows_series() {
    let f = make_builtin("exp").unwrap();
    let sol = shoot_regular(&f, 3, 0.0, ShootOptions::new(1e-10, 5.0)).unwrap();
    let (u0, du0) = sol.eval(0.0).unwrap();
    assert_eq!((u0, du0), (0.0, 0.0));
    let r = 1e-3;
    let (_, du) = sol.eval(r).unwrap();
    assert!((du / r + 1.0 / 3.0).abs() < 1e-6);
    // u(0) = 0 and u' < 0 leave no positive zero
    assert!(sol.first_zero.is_none());
}

#[test]
fn supercritical_ground_state_stays_positive() {
    let f = make_builtin("power:p=6").unwrap();
    let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-9, 1e3)).unwrap();
    assert_eq!(sol.termination, Termination::ReachedRmax);
    assert!(sol.first_zero.is_none());
    assert!(sol.nodes.iter().all(|n| n.u > 0.0));
    assert!((sol.r_max() - 1e3).abs() < 1e-9);
    assert!(residual_norm(&f, &sol) <= 1e-8);
}

#[test]
fn lane_emden_cubic_first_zero() {
    // tabulated first zero of the n = 3 Lane–Emden function
    let f = make_builtin("power:p=3").unwrap();
    let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-11, 20.0)).unwrap();
    assert_eq!(sol.termination, Termination::FirstZero);
    let r0 = sol.first_zero.unwrap();
    assert!((r0 - 6.896_848_619).abs() < 1e-7, "{r0}");
    assert!(sol.eval(r0).unwrap().0.abs() <= 1e-10);
    // scaling u_ρ(r) = ρ u_1(ρ r)
    let sol = shoot_regular(&f, 3, 4.0, ShootOptions::new(1e-11, 20.0)).unwrap();
    assert!((sol.first_zero.unwrap() - 6.896_848_619 / 4.0).abs() < 1e-7);
}

#[test]
fn recorded_zero_keeps_integrating() {
    let f = make_builtin("exp").unwrap();
    let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-9, 50.0)).unwrap();
    let r0 = sol.first_zero.unwrap();
    assert_eq!(sol.termination, Termination::ReachedRmax);
    assert!(sol.r_max() > r0);
    assert!(sol.eval(r0).unwrap().0.abs() <= 1e-10);
    assert!(sol.eval(0.999 * r0).unwrap().0 > 0.0);
    assert!(sol.eval(1.001 * r0).unwrap().0 < 0.0);

    let off = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-9, 50.0).zero_mode(ZeroMode::Off)).unwrap();
    assert!(off.first_zero.is_none());
}

#[test]
fn limit_equation_reduces_to_original_for_scale_invariant_growth() {
    for (spec, center) in [("power:p=5,a=0", 1.0), ("exp", 0.0), ("exp", 3.0)] {
        let f = make_builtin(spec).unwrap();
        let q = f.q_analytic().unwrap();
        let opts = ShootOptions::new(1e-10, 10.0);
        let a = shoot_regular(&f, 3, center, opts).unwrap();
        let b = shoot_limit(&f, 3, q, center, opts).unwrap();
        for i in 0..=200 {
            let r = (i as f64 * 0.05).min(a.r_max()).min(b.r_max());
            let (ua, _) = a.eval(r).unwrap();
            let (ub, _) = b.eval(r).unwrap();
            assert!((ua - ub).abs() <= 1e-8, "{spec} r={r}: {ua} vs {ub}");
        }
    }
}

#[test]
fn shifted_power_keeps_original_equation() {
    // F f' = p/(p-1) for every shift, so the gradient term vanishes
    let f = make_builtin("power:p=5,a=1").unwrap();
    let q = f.q_analytic().unwrap();
    let opts = ShootOptions::new(1e-10, 5.0).zero_mode(ZeroMode::Off);
    let a = shoot_regular(&f, 3, 1.0, opts).unwrap();
    let b = shoot_limit(&f, 3, q, 1.0, opts).unwrap();
    assert!((a.eval(2.0).unwrap().0 - b.eval(2.0).unwrap().0).abs() < 1e-8);
}

#[test]
fn limit_equation_differs_for_exp_power() {
    let f = make_builtin("exppow:p=2").unwrap();
    let q = f.q_analytic().unwrap();
    let opts = ShootOptions::new(1e-10, 2.0);
    let a = shoot_regular(&f, 3, 1.0, opts).unwrap();
    let b = shoot_limit(&f, 3, q, 1.0, opts).unwrap();
    let r = 0.5 * a.r_max().min(b.r_max());
    assert!((a.eval(r).unwrap().0 - b.eval(r).unwrap().0).abs() > 1e-3);
    assert!(residual_norm(&f, &b) <= 1e-9);
}

#[test]
fn constant_profile_residual_is_source() {
    let f = make_builtin("exp").unwrap();
    let samples: Vec<_> = (1..=10).map(|i| (i as f64 * 0.1, 1.0, 0.0, 0.0)).collect();
    let sol = RadialSolution::from_samples(&f, 3, Equation::Original, &samples, 1e-9).unwrap();
    let res = residual_norm(&f, &sol);
    assert!((res - std::f64::consts::E).abs() < 1e-12, "{res}");
}

#[test]
fn sampled_bubble_has_small_residual() {
    let f = make_builtin("power:p=5").unwrap();
    let samples: Vec<_> = (0..=10_000)
        .map(|i| {
            let r = i as f64 * 1e-3;
            let w = 1.0 + r * r / 3.0;
            let u = w.powf(-0.5);
            let du = -r / 3.0 * w.powf(-1.5);
            let ddu = -w.powf(-1.5) / 3.0 + r * r / 3.0 * w.powf(-2.5);
            (r, u, du, ddu)
        })
        .collect();
    let sol = RadialSolution::from_samples(&f, 3, Equation::Original, &samples, 1e-9).unwrap();
    assert!(residual_norm(&f, &sol) <= 1e-6);
}

#[test]
fn critical_formula_values() {
    let f = make_builtin("power:p=5").unwrap();
    let v = exact_limit_critical(&f, 3, 1.0, 3f64.sqrt()).unwrap();
    assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((exact_limit_critical(&f, 3, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
    let s = 3f64.sqrt() / 2.0;
    let v1 = exact_limit_critical(&f, 3, 1.0, s).unwrap();
    let v2 = exact_limit_critical(&f, 3, 2.0, s).unwrap();
    assert!((v1 - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    assert!((v2 - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    // both readings agree at σ = 1
    let u = exact_limit_critical_unit(&f, 3, 1.0, 1.3).unwrap();
    assert!((u - exact_limit_critical(&f, 3, 1.0, 1.3).unwrap()).abs() < 1e-14);
}

#[test]
fn critical_formula_solves_limit_equation() {
    let f = make_builtin("power:p=5").unwrap();
    let q = f.q_analytic().unwrap();
    let sol = shoot_limit(&f, 3, q, 2.0, ShootOptions::new(1e-11, 5.0)).unwrap();
    let mut gap_sigma: f64 = 0.0;
    let mut gap_unit: f64 = 0.0;
    for i in 0..=100 {
        let s = i as f64 * 0.05;
        let u = sol.eval(s).unwrap().0;
        gap_sigma = gap_sigma.max((u - exact_limit_critical(&f, 3, 2.0, s).unwrap()).abs());
        gap_unit = gap_unit.max((u - exact_limit_critical_unit(&f, 3, 2.0, s).unwrap()).abs());
    }
    assert!(gap_sigma < 1e-8, "{gap_sigma}");
    assert!(gap_unit > 1e-2, "{gap_unit}");
}

#[test]
fn critical_formula_requires_critical_regime() {
    let f = make_builtin("exp").unwrap();
    assert!(matches!(exact_limit_critical(&f, 3, 0.0, 1.0), Err(Error::Regime(_))));
}

#[test]
fn scale_invariance_of_limit_equation() {
    for (spec, sigma) in [("power:p=3", 1.0), ("exp", 0.5)] {
        let f = make_builtin(spec).unwrap();
        let q = f.q_analytic().unwrap();
        let lambda: f64 = 2.5;
        let opts = ShootOptions::new(1e-11, 4.0).zero_mode(ZeroMode::Off);
        let base = shoot_limit(&f, 3, q, sigma, opts).unwrap();
        let moved_center = f.big_f_inv(f.big_f(sigma).unwrap() / (lambda * lambda)).unwrap();
        let moved = shoot_limit(&f, 3, q, moved_center, ShootOptions::new(1e-11, 1.0)).unwrap();
        for i in 0..=40 {
            let s = i as f64 * 0.025;
            let v = base.eval(lambda * s).unwrap().0;
            if !f.contains(v) {
                break;
            }
            let w = f.big_f_inv(f.big_f(v).unwrap() / (lambda * lambda)).unwrap();
            let direct = moved.eval(s).unwrap().0;
            assert!((w - direct).abs() < 1e-6, "{spec} s={s}: {w} vs {direct}");
        }
    }
}

#[test]
fn csv_export() {
    let f = make_builtin("power:p=5").unwrap();
    let sol = shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-8, 2.0)).unwrap();
    let csv = sol.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,du"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), sol.nodes.len());
    for (row, (r, u, du)) in rows.iter().zip(sol.rows()) {
        // 17 significant digits round-trip exactly
        assert_eq!(row, &vec![r, u, du]);
    }
}

#[test]
fn rejects_bad_inputs() {
    let f = make_builtin("power:p=5").unwrap();
    assert!(matches!(shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-3, 5.0)), Err(Error::Constraint(_))));
    assert!(matches!(shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-13, 5.0)), Err(Error::Constraint(_))));
    assert!(matches!(shoot_regular(&f, 3, -1.0, ShootOptions::default()), Err(Error::Domain(_))));
    assert!(matches!(shoot_regular(&f, 3, 1.0, ShootOptions::new(1e-9, -1.0)), Err(Error::Constraint(_))));
    // without zero detection an F11 trajectory cannot leave u > 0
    let sub = make_builtin("power:p=3").unwrap();
    let off = ShootOptions::new(1e-9, 20.0).zero_mode(ZeroMode::Off);
    assert!(matches!(shoot_regular(&sub, 3, 1.0, off), Err(Error::DomainExit { .. })));
}

#[test]
fn repeated_shots_are_identical() {
    let f = make_builtin("iterexp:n=2").unwrap();
    let a = shoot_regular(&f, 3, 2.0, ShootOptions::new(1e-9, 10.0)).unwrap();
    let b = shoot_regular(&f, 3, 2.0, ShootOptions::new(1e-9, 10.0)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn long_shots_restart_their_scaling() {
    // for e^u, u(r; ρ) = ρ + U(e^{ρ/2} r) with U the shot from 0, so the
    // first zero approaches the singular radius √2 at the rate e^{-ρ/4}
    let f = make_builtin("exp").unwrap();
    let sol = shoot_regular(&f, 3, 1000.0, ShootOptions::new(1e-10, 10.0).zero_mode(ZeroMode::Stop)).unwrap();
    assert!(sol.segments.len() > 1);
    assert!((sol.first_zero.unwrap() - 2f64.sqrt()).abs() < 1e-8);
    let radii = sol.radii();
    assert!(radii.windows(2).all(|w| w[1] > w[0]));
    for seg in &sol.segments[1..] {
        let node = sol.nodes[seg.start];
        let r = seg.ln_scale.exp();
        for h in [-1e-9, 1e-9] {
            let (u, _) = sol.eval(r * (1.0 + h)).unwrap();
            assert!((u - node.u).abs() < 1e-6 * node.u.abs().max(1.0));
        }
    }
    assert!(residual_norm(&f, &sol) <= 1e-8 * 1000.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decreasing_until_first_zero(spec_idx in 0usize..4, center in 0.1f64..5.0, n in 3u32..12) {
        let spec = ["power:p=3", "power:p=7,a=1", "exp", "exppow:p=2"][spec_idx];
        let f = make_builtin(spec).unwrap();
        let sol = shoot_regular(&f, n, center, ShootOptions::new(1e-9, 10.0)).unwrap();
        let end = sol.first_zero.unwrap_or(f64::INFINITY);
        for (r, u, du) in sol.rows() {
            if r > 0.0 && r < end {
                prop_assert!(du < 0.0, "{} r={} u={} du={}", spec, r, u, du);
            }
            if r < end {
                prop_assert!(u > 0.0 || r == end);
            }
        }
        // rounding of the interpolant grows with |u| on short steps
        prop_assert!(residual_norm(&f, &sol) <= 1e-8 * center.max(1.0));
    }
}
