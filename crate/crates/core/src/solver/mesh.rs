use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strip::StripSolution;
use crate::error::{Error, Result};
use crate::geometry::{surface_forms, unit_normal_angle, CoefficientSource, Jet2, Problem};
use crate::monge_ampere::residual;

/// Samples of the solution on a `(u, v)` grid, stored row by row in `v`:
/// entry `iv * n_u + iu` belongs to `(u[iu], v[iv])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub n_u: usize,
    pub n_v: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Chart coordinates `(x, y, z)`.
    pub position: Vec<[f64; 3]>,
    pub gradient: Vec<[f64; 2]>,
    /// Position in the ambient model (Euclidean, Poincaré ball, upper half
    /// space or unit sphere).
    pub ambient: Vec<[f64; 3]>,
    /// Upward unit normal in chart components.
    pub normal: Vec<[f64; 3]>,
    pub ambient_normal: Vec<[f64; 3]>,
    /// Angle function `ν`.
    pub nu: Vec<f64>,
    pub k_prescribed: Vec<f64>,
    /// `det II / det I`; NaN where the parametrization degenerates.
    pub k_computed: Vec<f64>,
    /// Equation residual normalized by `1 + |E|`; NaN where undefined.
    pub residual: Vec<f64>,
}

impl SurfaceMesh {
    pub fn index(&self, iu: usize, iv: usize) -> usize {
        iv * self.n_u + iu
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrilateral faces as vertex index quadruples, periodic in `u`. With
    /// two columns the closing quad would repeat the first one and is left out.
    pub fn faces(&self) -> Vec<[usize; 4]> {
        let cols = if self.n_u > 2 { self.n_u } else { self.n_u.saturating_sub(1) };
        let mut out = Vec::with_capacity(cols * self.n_v.saturating_sub(1));
        for iv in 0..self.n_v.saturating_sub(1) {
            for iu in 0..cols {
                let iu1 = (iu + 1) % self.n_u;
                out.push([
                    self.index(iu, iv),
                    self.index(iu1, iv),
                    self.index(iu1, iv + 1),
                    self.index(iu, iv + 1),
                ]);
            }
        }
        out
    }

    /// Largest relative deviation `|K_computed − K| / K` over `v ≥ v_min`.
    pub fn max_curvature_deviation(&self, v_min: f64) -> f64 {
        (0..self.len())
            .filter(|&i| self.v[i / self.n_u] >= v_min && self.k_computed[i].is_finite())
            .map(|i| (self.k_computed[i] - self.k_prescribed[i]).abs() / self.k_prescribed[i])
            .fold(0.0, f64::max)
    }
}

/// Evaluates the strip solution on `n_u × n_v` points, `u` uniform on the
/// circle and `v` uniform on `[v_range.0, v_range.1]` inclusive.
pub fn evaluate(
    sol: &StripSolution,
    problem: &Problem,
    (n_u, n_v): (usize, usize),
    v_range: (f64, f64),
) -> Result<SurfaceMesh> {
    if n_u < 3 || n_v < 2 {
        return Err(Error::InvalidArgument(format!("mesh size {n_u} × {n_v}")));
    }
    let (v0, v1) = v_range;
    if !(v0 >= 0.0 && v1 > v0 && v1 <= sol.height * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "v range [{v0}, {v1}] outside the strip [0, {}]",
            sol.height
        )));
    }
    let u: Vec<f64> = (0..n_u).map(|i| TAU * i as f64 / n_u as f64).collect();
    let v: Vec<f64> = (0..n_v)
        .map(|j| v0 + (v1 - v0) * j as f64 / (n_v - 1) as f64)
        .collect();
    let model = &problem.model;
    type Row = ([f64; 3], [f64; 2], [f64; 3], [f64; 3], [f64; 3], f64, f64, f64, f64);
    let cols: Vec<Vec<Row>> = u
        .par_iter()
        .map(|&uu| {
            sol.column(uu, &v)
                .into_iter()
                .map(|d| {
                    let st = d.state();
                    let pos = d.position();
                    let (n, nu) = unit_normal_angle(model, &st)?;
                    let co = problem.coefficients(&st)?;
                    let kp = problem.curvature.eval(pos[0], pos[1], pos[2])?;
                    let (d1, d2) = d.surface_derivatives();
                    let (first, second) = surface_forms(model, pos, [st.p, st.q], d1, d2);
                    let det1 = first[0] * first[2] - first[1] * first[1];
                    let tr1 = first[0] + first[2];
                    let kc = if det1 > 1e-14 * tr1 * tr1 && det1 > 0.0 {
                        (second[0] * second[2] - second[1] * second[1]) / det1
                    } else {
                        f64::NAN
                    };
                    let res = match d.graph_hessian() {
                        Some((r, s, t)) => residual(&Jet2 { state: st, r, s, t }, &co).abs() / (1.0 + co.e.abs()),
                        None => f64::NAN,
                    };
                    Ok((
                        pos,
                        [st.p, st.q],
                        model.to_ambient(pos),
                        n,
                        model.ambient_direction(pos, n),
                        nu,
                        kp,
                        kc,
                        res,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut mesh = SurfaceMesh {
        n_u,
        n_v,
        u,
        v,
        position: Vec::with_capacity(n_u * n_v),
        gradient: Vec::with_capacity(n_u * n_v),
        ambient: Vec::with_capacity(n_u * n_v),
        normal: Vec::with_capacity(n_u * n_v),
        ambient_normal: Vec::with_capacity(n_u * n_v),
        nu: Vec::with_capacity(n_u * n_v),
        k_prescribed: Vec::with_capacity(n_u * n_v),
        k_computed: Vec::with_capacity(n_u * n_v),
        residual: Vec::with_capacity(n_u * n_v),
    };
    for iv in 0..n_v {
        for col in &cols {
            let r = col[iv];
            mesh.position.push(r.0);
            mesh.gradient.push(r.1);
            mesh.ambient.push(r.2);
            mesh.normal.push(r.3);
            mesh.ambient_normal.push(r.4);
            mesh.nu.push(r.5);
            mesh.k_prescribed.push(r.6);
            mesh.k_computed.push(r.7);
            mesh.residual.push(r.8);
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::PeriodicCurve;
    use crate::geometry::{make_space_form, Chart, CurvatureField};
    use crate::solver::{cauchy_data, solve, SolverOptions};

    #[test]
    fn circle_mesh_has_prescribed_curvature() {
        let pr = Problem::new(make_space_form(0, Chart::Cartesian).unwrap(), CurvatureField::constant(1.0));
        let data = cauchy_data(&PeriodicCurve::circle(1.0, true), &pr, 16).unwrap();
        let sol = solve(&data, &pr, &SolverOptions { order: 16, levels: 16, ..Default::default() }).unwrap();
        let mesh = evaluate(&sol, &pr, (24, 9), (0.0, sol.height)).unwrap();
        assert_eq!(mesh.len(), 24 * 9);
        assert_eq!(mesh.faces().len(), 24 * 8);
        assert!(mesh.k_computed[..24].iter().all(|k| k.is_nan()));
        let dev = mesh.max_curvature_deviation(0.25 * sol.height);
        assert!(dev < 1e-6, "{dev}");
        assert!(evaluate(&sol, &pr, (24, 9), (0.0, 2.0 * sol.height)).is_err());
    }
}
