mod common;

use std::f64::consts::TAU;

use peaked_core::monge_ampere::first_order_residual;
use peaked_core::*;
use proptest::prelude::*;

use common::*;

fn perturbed_circle(rho: f64, a2: f64, b3: f64) -> PeriodicCurve {
    PeriodicCurve::new(
        TrigSeries::new(vec![0.0, rho, a2 * rho], vec![]),
        TrigSeries::new(vec![], vec![0.0, -rho, 0.0, b3 * rho]),
    )
}

fn small_opts(order: usize) -> SolverOptions {
    SolverOptions { order, levels: 16, ..Default::default() }
}

#[test]
fn circle_matches_rotational_oracle_at_low_order() {
    let pr = cartesian_unit();
    let data = cauchy_data(&PeriodicCurve::circle(1.0, true), &pr, 24).unwrap();
    let sol = solve(&data, &pr, &small_opts(24)).unwrap();
    let mut err = 0.0f64;
    for j in 0..=8 {
        let v = 0.5 * sol.height * j as f64 / 8.0;
        for i in 0..16 {
            let u = TAU * i as f64 / 16.0;
            let got = sol.eval(u, v);
            let want = rotational_field(1.0, u, v);
            err = (0..5).fold(err, |m, c| m.max((got[c] - want[c]).abs()));
        }
    }
    assert!(err < 1e-8, "{err}");
}

#[test]
fn rotational_radius_follows_growth_ratio() {
    for rho in [0.5, 2.0] {
        let pr = cartesian_unit();
        let data = cauchy_data(&PeriodicCurve::circle(rho, true), &pr, 24).unwrap();
        let sol = solve(&data, &pr, &small_opts(24)).unwrap();
        let d = &sol.diagnostics;
        assert!((sol.height - 0.5 / d.growth_ratio).abs() < 1e-12);
        assert!(sol.height > 0.0 && sol.height.is_finite());
    }
}

#[test]
fn hyperbolic_constant_curvature_is_reproduced() {
    let pr = problem(-1, Chart::CylindricalH3, "2");
    let data = cauchy_data(&test_curve(1.0), &pr, 32).unwrap();
    let sol = solve(&data, &pr, &SolverOptions { order: 32, levels: 20, ..Default::default() }).unwrap();
    let r = sol.height;
    let mesh = evaluate(&sol, &pr, (32, 9), (0.25 * r, 0.5 * r)).unwrap();
    assert!(mesh.max_curvature_deviation(0.25 * r) < 1e-6);
    assert!(mesh.nu.iter().all(|&n| n > 0.0 && n <= 1.0));
}

#[test]
fn counterclockwise_curve_is_rejected_until_oriented() {
    let pr = cartesian_unit();
    let ccw = PeriodicCurve::circle(1.0, false);
    assert!(matches!(cauchy_data(&ccw, &pr, 16), Err(Error::WrongOrientation)));
    let fixed = orient_for_construction(&ccw).unwrap();
    assert!(cauchy_data(&fixed, &pr, 16).is_ok());
}

#[test]
fn low_levels_are_shift_equivariant() {
    let pr = problem(0, Chart::Cartesian, "exp(z)");
    let gamma = test_curve(1.0);
    let opts = small_opts(32);
    let sol = solve(&cauchy_data(&gamma, &pr, 32).unwrap(), &pr, &opts).unwrap();
    let moved = solve(&cauchy_data(&gamma.shifted(1.0), &pr, 32).unwrap(), &pr, &opts).unwrap();
    let expected = sol.shifted(1.0);
    for k in 0..=8 {
        let d = moved.levels[k]
            .iter()
            .zip(&expected.levels[k])
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "level {k}: {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cauchy_data_satisfies_first_order_system(
        rho in 0.5f64..2.0,
        a2 in -0.05f64..0.05,
        b3 in -0.05f64..0.05,
        u in 0.0f64..TAU,
    ) {
        let pr = problem(-1, Chart::CylindricalH3, "exp(z)");
        let data = cauchy_data(&perturbed_circle(rho, a2, b3), &pr, 48).unwrap();
        let s: [f64; 5] = std::array::from_fn(|i| data.values[i].eval(u));
        let du: [f64; 5] = std::array::from_fn(|i| data.values[i].derivative().eval(u));
        let dv: [f64; 5] = std::array::from_fn(|i| data.normal[i].eval(u));
        let co = pr.coefficients(&State::from_array(s)).unwrap();
        let res = first_order_residual(du, dv, &co).unwrap();
        prop_assert!(res.iter().all(|r| r.abs() < 1e-12), "{res:?}");
    }

    #[test]
    fn solution_reproduces_cauchy_data(
        rho in 0.5f64..2.0,
        a2 in -0.05f64..0.05,
        b3 in -0.05f64..0.05,
    ) {
        let pr = cartesian_unit();
        let data = cauchy_data(&perturbed_circle(rho, a2, b3), &pr, 16).unwrap();
        let sol = solve(&data, &pr, &small_opts(16)).unwrap();
        for c in 0..5 {
            prop_assert!(sol.levels[0][c].max_coeff_diff(&data.values[c]) < 1e-14);
            prop_assert!(sol.levels[1][c].max_coeff_diff(&data.normal[c]) < 1e-14);
        }
    }

    #[test]
    fn constructed_curvature_matches_prescribed(
        rho in 0.6f64..1.5,
        a2 in -0.04f64..0.04,
        b3 in -0.04f64..0.04,
    ) {
        let pr = problem(1, Chart::StereographicS3, "1 + 0.5 * x * x");
        let data = cauchy_data(&perturbed_circle(rho, a2, b3), &pr, 24).unwrap();
        let sol = solve(&data, &pr, &SolverOptions { order: 24, levels: 20, ..Default::default() }).unwrap();
        let r = sol.height;
        let mesh = evaluate(&sol, &pr, (24, 5), (0.25 * r, 0.5 * r)).unwrap();
        prop_assert!(mesh.max_curvature_deviation(0.25 * r) < 1e-5);
    }
}
