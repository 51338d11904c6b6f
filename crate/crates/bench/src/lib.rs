//! Fixtures shared by the benchmarks.

use peaked_core::{make_space_form, Chart, CurvatureField, PeriodicCurve, Problem, TrigSeries};

/// Flat cartesian problem with `K = 1`.
pub fn unit_problem() -> Problem {
    Problem::new(make_space_form(0, Chart::Cartesian).unwrap(), CurvatureField::parse("1").unwrap())
}

/// Clockwise perturbed circle with a few nonzero modes.
pub fn wavy_curve() -> PeriodicCurve {
    PeriodicCurve::new(
        TrigSeries::new(vec![0.0, 1.0, 0.05, 0.0, 0.01], vec![]),
        TrigSeries::new(vec![], vec![0.0, -1.0, 0.0, 0.03]),
    )
}
