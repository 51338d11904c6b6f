mod common;

use peaked_core::analysis::*;
use peaked_core::*;

use common::*;

fn circle() -> (StripSolution, Problem) {
    let pr = cartesian_unit();
    let data = cauchy_data(&PeriodicCurve::circle(1.0, true), &pr, 32).unwrap();
    let sol = solve(&data, &pr, &SolverOptions { order: 32, levels: 20, ..Default::default() }).unwrap();
    (sol, pr)
}

#[test]
fn constructed_peaked_sphere_is_classified_bounded_nonvertical() {
    let (sol, pr) = circle();
    let rows: Vec<f64> = (0..6).map(|k| sol.height * 0.4 / 2f64.powi(k)).collect();
    let g = samples_from_solution(&sol, &pr, &rows, 64).unwrap();
    let rep = classify_singularity(&g, &ClassifierOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::BoundedNonvertical, "{}", rep.reason);
    assert!((rep.inf_nu - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-2);
    let k = extrinsic_curvature(&g, &pr).unwrap();
    assert!(k.max_rel_deviation < 1e-6);
}

#[test]
fn classifier_works_from_positions_alone() {
    let cart = make_space_form(0, Chart::Cartesian).unwrap();
    let radii = [0.16, 0.08, 0.04, 0.02, 0.01];
    let g = radial_samples(cart, &PeakedSphere(1.0), &radii, 64, false).unwrap();
    let rep = classify_singularity(&g, &ClassifierOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::BoundedNonvertical, "{}", rep.reason);
}

#[test]
fn sinh_gordon_uses_space_form_curvature() {
    let pr = problem(-1, Chart::CylindricalH3, "2");
    let data = cauchy_data(&test_curve(1.0), &pr, 32).unwrap();
    let sol = solve(&data, &pr, &SolverOptions { order: 32, levels: 20, ..Default::default() }).unwrap();
    let r = sol.height;
    let rep = sinh_gordon_residual(&sol, &pr, (16, 5), (0.1 * r, 0.5 * r), 1e-3, 1.0).unwrap();
    assert_eq!(rep.space_form, -1);
    assert!(rep.sup < 1e-5, "{}", rep.sup);
    assert!(rep.sup_metric_sign > 1e3 * rep.sup);
}

#[test]
fn forms_satisfy_curvature_identity() {
    let (sol, pr) = circle();
    let r = sol.height;
    let f = fundamental_forms(&sol, &pr, (32, 9), (0.0, 0.5 * r)).unwrap();
    assert!(f.roca_defect() < 1e-8);
    assert_eq!(f.boundary_omega(), 0.0);
    assert!(f.min_interior_omega() > 0.0);
}

#[test]
fn legendre_levels_approach_limit_gradient() {
    let (sol, pr) = circle();
    let rep = legendre_levels(&sol, &pr, &[4e-3, 2e-3, 1e-3], 64).unwrap();
    assert!(rep.all_convex());
    assert!(rep.hausdorff_monotone());
}
