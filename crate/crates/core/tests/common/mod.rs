#![allow(dead_code)]

use peaked_core::{
    make_space_form, Chart, CurvatureField, PeriodicCurve, Problem, TrigSeries,
};

/// Profile `(X, P, H)` of the rotational solution through the clockwise
/// circle of radius `rho` (cartesian chart, K = 1), integrated with RK4.
pub fn rotational_profile(rho: f64, v: f64) -> [f64; 3] {
    let rhs = |s: [f64; 3]| {
        let (x, p) = (s[0], s[1]);
        let xd = p / (1.0 + p * p);
        [xd, (1.0 + p * p) * x, p * xd]
    };
    let n = ((v.abs() / 1e-3).ceil() as usize).max(1);
    let h = v / n as f64;
    let mut s = [0.0, rho, 0.0];
    let add = |s: [f64; 3], k: [f64; 3], a: f64| [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]];
    for _ in 0..n {
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, h / 2.0));
        let k3 = rhs(add(s, k2, h / 2.0));
        let k4 = rhs(add(s, k3, h));
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

/// The field `(x, y, z, p, q)` of the rotational solution at `(u, v)`.
pub fn rotational_field(rho: f64, u: f64, v: f64) -> [f64; 5] {
    let [x, p, h] = rotational_profile(rho, v);
    [x * u.cos(), -x * u.sin(), h, p * u.cos(), -p * u.sin()]
}

pub fn problem(c: i32, chart: Chart, k: &str) -> Problem {
    Problem::new(make_space_form(c, chart).unwrap(), CurvatureField::parse(k).unwrap())
}

pub fn cartesian_unit() -> Problem {
    problem(0, Chart::Cartesian, "1")
}

/// A clockwise, strictly convex, non-rotational curve of limit gradients.
pub fn test_curve(scale: f64) -> PeriodicCurve {
    PeriodicCurve::new(
        TrigSeries::new(vec![0.05 * scale, 0.8 * scale, 0.08 * scale], vec![]),
        TrigSeries::new(vec![], vec![0.0, -0.6 * scale, 0.04 * scale, 0.02 * scale]),
    )
}
