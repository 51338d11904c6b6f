use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::{cross, dot, spherical_lift, Frame, PeriodicCurve};
use crate::error::{Error, Result};
use crate::geometry::{surface_forms, Problem};
use crate::solver::StripSolution;

/// Complex and real data of the fundamental forms at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointForms {
    pub first: [f64; 3],
    pub second: [f64; 3],
    pub q: Complex64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
    /// `U`; the companion field is `V = −Ū`.
    pub u_field: Complex64,
    /// Prescribed curvature along the solution.
    pub k: f64,
    /// `det II / det I`, NaN on the boundary row.
    pub k_ext: f64,
}

/// `μ − |Q|` without cancellation: `(EG − F²) / (E + G + √((E − G)² + 4F²))`.
fn mu_minus_q(first: [f64; 3]) -> (f64, f64) {
    let [e, f, g] = first;
    let det = e * g - f * f;
    let root = ((e - g).powi(2) + 4.0 * f * f).sqrt();
    (det / (e + g + root), root / 4.0)
}

/// Forms at `(u, v)`. `orientation` is `±1` and multiplies the second form,
/// so that `ρ > 0` for the canonical orientation.
pub fn point_forms(
    sol: &StripSolution,
    problem: &Problem,
    u: f64,
    v: f64,
    orientation: f64,
) -> Result<PointForms> {
    let d = sol.derivs(u, v);
    let st = d.state();
    let pos = d.position();
    let (d1, d2) = d.surface_derivatives();
    let (first, mut second) = surface_forms(&problem.model, pos, [st.p, st.q], d1, d2);
    second.iter_mut().for_each(|x| *x *= orientation);
    let [e, f, g] = first;
    let tr = e + g;
    let q = Complex64::new(e - g, -2.0 * f) / 4.0;
    let mu = tr / 4.0;
    let rho = (second[0] + second[2]) / 4.0;
    let (gap, qabs) = mu_minus_q(first);
    if qabs <= 1e-14 * tr {
        return Err(Error::QVanishes { u, v });
    }
    if gap < -1e-12 * tr {
        return Err(Error::MuBelowQ { u, v });
    }
    let gap = gap.max(0.0);
    let omega = 2.0 * (gap / (2.0 * qabs)).sqrt().asinh();
    let (k, grad) = problem.curvature.eval_with_grad(pos[0], pos[1], pos[2])?;
    let ku: f64 = (0..3).map(|i| grad[i] * d1[0][i]).sum();
    let kv: f64 = (0..3).map(|i| grad[i] * d1[1][i]).sum();
    let k_wbar = Complex64::new(ku, kv) / 2.0;
    let u_field = -k_wbar * q * omega.sinh() / (4.0 * k * qabs);
    let det1 = e * g - f * f;
    let k_ext = if det1 > 1e-14 * tr * tr {
        (second[0] * second[2] - second[1] * second[1]) / det1
    } else {
        f64::NAN
    };
    Ok(PointForms {
        first,
        second,
        q,
        mu,
        rho,
        omega,
        u_field,
        k,
        k_ext,
    })
}

/// Sign making the second form positive, read off in the middle of the strip.
pub fn canonical_orientation(sol: &StripSolution, problem: &Problem) -> Result<f64> {
    let pf = point_forms(sol, problem, 0.0, 0.5 * sol.height, 1.0)?;
    Ok(if pf.rho >= 0.0 { 1.0 } else { -1.0 })
}

/// Fields of the fundamental forms over a `(u, v)` grid, stored row by row
/// in `v` like [`crate::SurfaceMesh`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormsReport {
    pub n_u: usize,
    pub n_v: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub orientation: f64,
    pub q: Vec<[f64; 2]>,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub omega: Vec<f64>,
    pub u_field: Vec<[f64; 2]>,
    pub v_field: Vec<[f64; 2]>,
    pub k: Vec<f64>,
    pub k_ext: Vec<f64>,
}

impl FormsReport {
    /// Largest `|ρ² − K(μ² − |Q|²)| / ρ²` over points with `ω ≥ 10⁻⁶`.
    pub fn roca_defect(&self) -> f64 {
        (0..self.mu.len())
            .filter(|&i| self.omega[i] >= 1e-6)
            .map(|i| {
                let q2 = self.q[i][0].powi(2) + self.q[i][1].powi(2);
                let r2 = self.rho[i].powi(2);
                (r2 - self.k[i] * (self.mu[i].powi(2) - q2)).abs() / r2
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|ω|` on rows with `v = 0`.
    pub fn boundary_omega(&self) -> f64 {
        (0..self.mu.len())
            .filter(|&i| self.v[i / self.n_u] == 0.0)
            .map(|i| self.omega[i].abs())
            .fold(0.0, f64::max)
    }

    /// Smallest `ω` on rows with `v > 0`.
    pub fn min_interior_omega(&self) -> f64 {
        (0..self.mu.len())
            .filter(|&i| self.v[i / self.n_u] > 0.0)
            .map(|i| self.omega[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_curvature_deviation(&self) -> f64 {
        self.k_ext
            .iter()
            .zip(&self.k)
            .filter(|(a, _)| a.is_finite())
            .map(|(a, k)| (a - k).abs() / k)
            .fold(0.0, f64::max)
    }
}

/// Evaluates the forms on `n_u × n_v` points, `v` uniform on `v_range`
/// inclusive.
pub fn fundamental_forms(
    sol: &StripSolution,
    problem: &Problem,
    (n_u, n_v): (usize, usize),
    v_range: (f64, f64),
) -> Result<FormsReport> {
    use rayon::prelude::*;
    if n_u < 3 || n_v < 2 {
        return Err(Error::InvalidArgument(format!("grid {n_u} × {n_v}")));
    }
    let orientation = canonical_orientation(sol, problem)?;
    let u: Vec<f64> = (0..n_u).map(|i| std::f64::consts::TAU * i as f64 / n_u as f64).collect();
    let v: Vec<f64> = (0..n_v)
        .map(|j| v_range.0 + (v_range.1 - v_range.0) * j as f64 / (n_v - 1) as f64)
        .collect();
    let pts: Vec<PointForms> = (0..n_u * n_v)
        .into_par_iter()
        .map(|i| point_forms(sol, problem, u[i % n_u], v[i / n_u], orientation))
        .collect::<Result<_>>()?;
    let c2 = |z: Complex64| [z.re, z.im];
    Ok(FormsReport {
        n_u,
        n_v,
        orientation,
        q: pts.iter().map(|p| c2(p.q)).collect(),
        mu: pts.iter().map(|p| p.mu).collect(),
        rho: pts.iter().map(|p| p.rho).collect(),
        omega: pts.iter().map(|p| p.omega).collect(),
        u_field: pts.iter().map(|p| c2(p.u_field)).collect(),
        v_field: pts.iter().map(|p| c2(-p.u_field.conj())).collect(),
        k: pts.iter().map(|p| p.k).collect(),
        k_ext: pts.iter().map(|p| p.k_ext).collect(),
        u,
        v,
    })
}

/// Sup and root-mean-square of the sinh-Gordon residual
/// `ω_ww̄ + U_w̄ − V_w + (K + κ)|Q| sinh ω` for `κ = c` and for `κ` equal to
/// the metric sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinhGordonReport {
    pub space_form: i32,
    pub metric_sign: f64,
    pub points: usize,
    pub sup: f64,
    pub rms: f64,
    pub sup_metric_sign: f64,
    pub rms_metric_sign: f64,
}

/// Residual over `n_u × n_v` interior points with `v` uniform on
/// `v_range`; derivatives of `ω` and `U` by fourth-order central
/// differences with step `h`.
pub fn sinh_gordon_residual(
    sol: &StripSolution,
    problem: &Problem,
    (n_u, n_v): (usize, usize),
    v_range: (f64, f64),
    h: f64,
    metric_sign: f64,
) -> Result<SinhGordonReport> {
    use rayon::prelude::*;
    if v_range.0 <= 2.0 * h || v_range.1 + 2.0 * h > sol.height {
        return Err(Error::InvalidArgument(format!(
            "stencil of width {h} leaves the strip on [{}, {}]",
            v_range.0, v_range.1
        )));
    }
    let orientation = canonical_orientation(sol, problem)?;
    let c = problem.model.c() as f64;
    let vals: Vec<[f64; 2]> = (0..n_u * n_v)
        .into_par_iter()
        .map(|i| {
            let u = std::f64::consts::TAU * (i % n_u) as f64 / n_u as f64;
            let v = v_range.0 + (v_range.1 - v_range.0) * (i / n_u) as f64 / (n_v.max(2) - 1) as f64;
            let at = |du: f64, dv: f64| point_forms(sol, problem, u + du, v + dv, orientation);
            let centre = at(0.0, 0.0)?;
            let w = [-2.0, -1.0, 1.0, 2.0];
            let d1 = [1.0, -8.0, 8.0, -1.0];
            let d2 = [-1.0, 16.0, 16.0, -1.0];
            let (mut lap, mut uu, mut uv) = (-60.0 * centre.omega, Complex64::default(), Complex64::default());
            for k in 0..4 {
                let pu = at(w[k] * h, 0.0)?;
                let pv = at(0.0, w[k] * h)?;
                lap += d2[k] * (pu.omega + pv.omega);
                uu += d1[k] * pu.u_field;
                uv += d1[k] * pv.u_field;
            }
            lap /= 12.0 * h * h;
            uu /= 12.0 * h;
            uv /= 12.0 * h;
            // U_w̄ − V_w = 2 Re U_w̄ = Re U_u − Im U_v
            let div = uu.re - uv.im;
            let base = lap / 4.0 + div;
            let src = centre.q.norm() * centre.omega.sinh();
            Ok([
                base + (centre.k + c) * src,
                base + (centre.k + metric_sign) * src,
            ])
        })
        .collect::<Result<_>>()?;
    let stats = |j: usize| {
        let sup = vals.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
        let rms = (vals.iter().map(|r| r[j] * r[j]).sum::<f64>() / vals.len() as f64).sqrt();
        (sup, rms)
    };
    let (sup, rms) = stats(0);
    let (sup_metric_sign, rms_metric_sign) = stats(1);
    Ok(SinhGordonReport {
        space_form: problem.model.c(),
        metric_sign,
        points: vals.len(),
        sup,
        rms,
        sup_metric_sign,
        rms_metric_sign,
    })
}

/// One-sided `ω_v(u, 0)` against `−2⟨η″, η × η′⟩ / ⟨η′, η′⟩` for the
/// boundary normal `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySlope {
    pub u: Vec<f64>,
    pub numeric: Vec<f64>,
    pub closed_form: Vec<f64>,
}

impl BoundarySlope {
    pub fn max_difference(&self) -> f64 {
        self.numeric
            .iter()
            .zip(&self.closed_form)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_numeric(&self) -> f64 {
        self.numeric.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Closed-form boundary slope of `ω` for the limit gradient `gamma`.
pub fn omega_slope_closed_form(gamma: &PeriodicCurve, u: f64) -> Result<f64> {
    let eta = spherical_lift(gamma, &Frame::default())?;
    let [s, s1, s2] = eta.derivatives(u);
    Ok(-2.0 * dot(s2, cross(s, s1)) / dot(s1, s1))
}

pub fn omega_boundary_slope(
    sol: &StripSolution,
    problem: &Problem,
    n_u: usize,
    h: f64,
) -> Result<BoundarySlope> {
    if 4.0 * h > sol.height {
        return Err(Error::InvalidArgument(format!("step {h} too large for the strip")));
    }
    let orientation = canonical_orientation(sol, problem)?;
    let gamma = PeriodicCurve::new(sol.levels[0][3].clone(), sol.levels[0][4].clone());
    let mut out = BoundarySlope {
        u: Vec::with_capacity(n_u),
        numeric: Vec::with_capacity(n_u),
        closed_form: Vec::with_capacity(n_u),
    };
    for i in 0..n_u {
        let u = std::f64::consts::TAU * i as f64 / n_u as f64;
        let w: Vec<f64> = (0..5)
            .map(|j| point_forms(sol, problem, u, j as f64 * h, orientation).map(|p| p.omega))
            .collect::<Result<_>>()?;
        let slope = (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]) / (12.0 * h);
        out.u.push(u);
        out.numeric.push(slope);
        out.closed_form.push(omega_slope_closed_form(&gamma, u)?);
    }
    Ok(out)
}
