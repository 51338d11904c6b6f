use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{convexity_report, ConvexityReport, Convexity, PeriodicCurve};
use crate::error::{Error, Result};
use crate::fourier::SpectralGrid;
use crate::geometry::{CoefficientSource, Jet2, Problem, State};
use crate::monge_ampere::{conformal_metric, convexifiers, Convexifier};
use crate::solver::StripSolution;

/// Legendre transform of the convexified graph
/// `z* = z + ε(c x² + a y²)/2` at one state:
/// `(p*, q*, x p* + y q* − z*)` with `p* = p + εcx`, `q* = q + εay`.
pub fn legendre_point(s: &State, conv: &Convexifier, eps: f64) -> [f64; 3] {
    let ps = s.p + eps * conv.c * s.x;
    let qs = s.q + eps * conv.a * s.y;
    let zs = s.z + 0.5 * eps * (conv.c * s.x * s.x + conv.a * s.y * s.y);
    [ps, qs, s.x * ps + s.y * qs - zs]
}

/// Discrete Hausdorff distance between two point sets.
pub fn hausdorff_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let one_sided = |p: &[[f64; 2]], q: &[[f64; 2]]| {
        p.par_iter()
            .map(|x| {
                q.iter()
                    .map(|y| (x[0] - y[0]).hypot(x[1] - y[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreLevel {
    pub level: f64,
    /// Range of the `v` at which the transform reaches the level.
    pub v_range: (f64, f64),
    pub convexity: ConvexityReport,
    /// Hausdorff distance to the limit gradient curve.
    pub hausdorff: f64,
    pub points: Vec<[f64; 2]>,
}

impl LegendreLevel {
    pub fn strictly_convex(&self) -> bool {
        self.convexity.verdict != Convexity::NotStrictlyConvex
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreReport {
    pub convexifier: Convexifier,
    pub metric_sign: f64,
    pub levels: Vec<LegendreLevel>,
}

impl LegendreReport {
    pub fn all_convex(&self) -> bool {
        self.levels.iter().all(LegendreLevel::strictly_convex)
    }

    /// Whether the Hausdorff distance decreases along levels sorted by
    /// decreasing height.
    pub fn hausdorff_monotone(&self) -> bool {
        let mut lv: Vec<&LegendreLevel> = self.levels.iter().collect();
        lv.sort_by(|a, b| b.level.total_cmp(&a.level));
        lv.windows(2).all(|w| w[1].hausdorff < w[0].hausdorff)
    }
}

/// Convexifier and metric sign for a strip solution, from the equation
/// coefficients on a collocation grid.
pub fn strip_convexifier(sol: &StripSolution, problem: &Problem) -> Result<(Convexifier, f64)> {
    let (n_u, n_v) = (64, 16);
    let mut abc = Vec::with_capacity(n_u * (n_v + 1));
    for i in 0..n_u {
        let u = TAU * i as f64 / n_u as f64;
        let vs: Vec<f64> = (0..=n_v).map(|j| sol.height * j as f64 / n_v as f64).collect();
        for d in sol.column(u, &vs) {
            let co = problem.coefficients(&d.state())?;
            abc.push([co.a, co.b, co.c]);
        }
    }
    let conv = convexifiers(&abc)?;
    let d = sol.derivs(0.0, 0.5 * sol.height);
    let (r, s, t) = d
        .graph_hessian()
        .ok_or_else(|| Error::DegenerateMetric("graph Jacobian vanishes mid-strip".into()))?;
    let j = Jet2 { state: d.state(), r, s, t };
    let co = problem.coefficients(&j.state)?;
    let eps = conformal_metric(&j, &co, false)?.eps;
    Ok((conv, eps))
}

/// Level curves `ℒ₃ = level` of the transformed strip, sampled at `n_u`
/// uniform values of `u`.
pub fn legendre_levels(
    sol: &StripSolution,
    problem: &Problem,
    levels: &[f64],
    n_u: usize,
) -> Result<LegendreReport> {
    if n_u < 16 {
        return Err(Error::InvalidArgument(format!("{n_u} samples per level curve")));
    }
    let (conv, eps) = strip_convexifier(sol, problem)?;
    let height_at = |u: f64, v: f64| legendre_point(&sol.derivs(u, v).state(), &conv, eps);
    let grid = SpectralGrid::new(n_u);
    let order = n_u / 4;
    let gamma = PeriodicCurve::new(sol.levels[0][3].clone(), sol.levels[0][4].clone());
    let dense = 4 * n_u;
    let gamma_pts: Vec<[f64; 2]> = (0..dense).map(|i| gamma.point(TAU * i as f64 / dense as f64)).collect();
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let roots: Vec<f64> = grid
            .nodes()
            .par_iter()
            .map(|&u| {
                let f = |v: f64| height_at(u, v)[2] - level;
                let steps = 64;
                let mut lo = 0.0;
                let mut flo = f(lo);
                for k in 1..=steps {
                    let hi = sol.height * k as f64 / steps as f64;
                    let fhi = f(hi);
                    if flo < 0.0 && fhi >= 0.0 {
                        let (mut a, mut b) = (lo, hi);
                        for _ in 0..200 {
                            let m = 0.5 * (a + b);
                            if m <= a || m >= b {
                                break;
                            }
                            if f(m) < 0.0 {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        return Ok(0.5 * (a + b));
                    }
                    lo = hi;
                    flo = fhi;
                }
                Err(Error::InvalidArgument(format!(
                    "level {level} not reached inside the strip at u = {u}"
                )))
            })
            .collect::<Result<_>>()?;
        let pts: Vec<[f64; 2]> = grid
            .nodes()
            .iter()
            .zip(&roots)
            .map(|(&u, &v)| {
                let l = height_at(u, v);
                [l[0], l[1]]
            })
            .collect();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let curve = PeriodicCurve::new(grid.from_grid(&xs, order), grid.from_grid(&ys, order));
        let convexity = convexity_report(&curve)?;
        let curve_pts: Vec<[f64; 2]> = (0..dense).map(|i| curve.point(TAU * i as f64 / dense as f64)).collect();
        out.push(LegendreLevel {
            level,
            v_range: (
                roots.iter().copied().fold(f64::INFINITY, f64::min),
                roots.iter().copied().fold(0.0, f64::max),
            ),
            convexity,
            hausdorff: hausdorff_distance(&curve_pts, &gamma_pts),
            points: pts,
        });
    }
    Ok(LegendreReport {
        convexifier: conv,
        metric_sign: eps,
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_is_a_fixed_point() {
        let conv = Convexifier { a: 0.0, c: 0.0 };
        for (x, y) in [(0.3, -0.2), (1.5, 0.7), (0.0, 0.0)] {
            let s = State::new(x, y, 0.5 * (x * x + y * y), x, y);
            let l = legendre_point(&s, &conv, 1.0);
            assert!((l[2] - 0.5 * (l[0] * l[0] + l[1] * l[1])).abs() < 1e-15);
            assert_eq!([l[0], l[1]], [x, y]);
        }
    }

    #[test]
    fn hausdorff_of_concentric_circles() {
        let circ = |r: f64| (0..200).map(|i| {
            let t = TAU * i as f64 / 200.0;
            [r * t.cos(), r * t.sin()]
        }).collect::<Vec<_>>();
        assert!((hausdorff_distance(&circ(1.0), &circ(1.5)) - 0.5).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&circ(1.0), &circ(1.0)), 0.0);
    }
}
