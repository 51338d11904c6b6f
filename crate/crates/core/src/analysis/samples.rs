use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{surface_forms, unit_normal_angle, Jet2, Problem, State, WarpedModel};
use crate::jet::{Jet, Real};
use crate::solver::StripSolution;

/// Default neighbourhood size for local quadratic fits.
pub const KNN_DEFAULT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `(p, q)`, estimated by [`GraphSamples::complete_derivatives`] if absent.
    pub grad: Option<[f64; 2]>,
    /// `(r, s, t)`.
    pub hess: Option<[f64; 3]>,
}

impl GraphSample {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn state(&self) -> Option<State> {
        self.grad.map(|[p, q]| State::new(self.x, self.y, self.z, p, q))
    }

    pub fn jet(&self) -> Option<Jet2> {
        let state = self.state()?;
        let [r, s, t] = self.hess?;
        Some(Jet2 { state, r, s, t })
    }
}

/// Samples grouped by nominal annulus radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub radius: f64,
    pub samples: Vec<GraphSample>,
}

/// Graph samples on a punctured disk around the origin, annuli ordered by
/// decreasing radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSamples {
    pub model: WarpedModel,
    pub annuli: Vec<Annulus>,
}

impl GraphSamples {
    pub fn new(model: WarpedModel, mut annuli: Vec<Annulus>) -> Result<Self> {
        for a in &annuli {
            if !(a.radius > 0.0) || a.samples.is_empty() {
                return Err(Error::InvalidArgument(format!("empty or degenerate annulus r = {}", a.radius)));
            }
            if let Some(s) = a.samples.iter().find(|s| !(s.radius() > 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "sample at the puncture ({}, {})",
                    s.x, s.y
                )));
            }
        }
        annuli.sort_by(|a, b| b.radius.total_cmp(&a.radius));
        Ok(GraphSamples { model, annuli })
    }

    pub fn len(&self) -> usize {
        self.annuli.iter().map(|a| a.samples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &GraphSample> {
        self.annuli.iter().flat_map(|a| &a.samples)
    }

    /// Fills missing gradients and Hessians by least-squares quadratics over
    /// the `k` nearest samples.
    pub fn complete_derivatives(&mut self, k: usize) -> Result<()> {
        if self.iter().all(|s| s.grad.is_some() && s.hess.is_some()) {
            return Ok(());
        }
        let all: Vec<GraphSample> = self.iter().copied().collect();
        if all.len() <= k || k < 6 {
            return Err(Error::InsufficientData(format!(
                "{} samples for {k}-neighbour fits",
                all.len()
            )));
        }
        let fits: Vec<Option<([f64; 2], [f64; 3])>> = all
            .par_iter()
            .map(|s| {
                if s.grad.is_some() && s.hess.is_some() {
                    None
                } else {
                    Some(local_quadratic(&all, s, k))
                }
            })
            .collect();
        let mut i = 0;
        for a in self.annuli.iter_mut() {
            for s in a.samples.iter_mut() {
                if let Some((g, h)) = fits[i] {
                    s.grad.get_or_insert(g);
                    s.hess.get_or_insert(h);
                }
                i += 1;
            }
        }
        Ok(())
    }
}

/// `z ≈ z₀ + p dx + q dy + (r dx² + 2s dx dy + t dy²)/2` over the `k`
/// nearest neighbours of `s` (including itself).
fn local_quadratic(all: &[GraphSample], s: &GraphSample, k: usize) -> ([f64; 2], [f64; 3]) {
    let mut idx: Vec<(f64, usize)> = all
        .iter()
        .enumerate()
        .map(|(i, o)| ((o.x - s.x).hypot(o.y - s.y), i))
        .collect();
    idx.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
    idx.truncate(k + 1);
    let scale = idx.iter().map(|p| p.0).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut a = DMatrix::zeros(idx.len(), 6);
    let mut b = DVector::zeros(idx.len());
    for (row, &(_, i)) in idx.iter().enumerate() {
        let (dx, dy) = ((all[i].x - s.x) / scale, (all[i].y - s.y) / scale);
        let cols = [1.0, dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy];
        for (c, v) in cols.iter().enumerate() {
            a[(row, c)] = *v;
        }
        b[row] = all[i].z;
    }
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(6));
    let s2 = scale * scale;
    ([sol[1] / scale, sol[2] / scale], [sol[3] / s2, sol[4] / s2, sol[5] / s2])
}

/// A graph `z = F(|(x, y)|)` with a closed-form profile.
pub trait RadialProfile: Sync {
    /// `F`, `F′`, `F″` at radius `r > 0`.
    fn profile(&self, r: f64) -> Result<[f64; 3]>;
}

fn radial_jet(f: impl Fn(Jet) -> Jet, r: f64) -> [f64; 3] {
    let j = f(Jet::variable(r, 3));
    [j.coeff(0), j.coeff(1), 2.0 * j.coeff(2)]
}

/// Horosphere `z = log(1 − √(1 − r²))` in the upper half space chart.
#[derive(Debug, Clone, Copy)]
pub struct Horosphere;

impl RadialProfile for Horosphere {
    fn profile(&self, r: f64) -> Result<[f64; 3]> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("horosphere radius {r}")));
        }
        Ok(radial_jet(|x| (1.0 - (1.0 - x * x).sqrt()).ln(), r))
    }
}

/// Sphere `z = √(R² − r²) − R` through the origin.
#[derive(Debug, Clone, Copy)]
pub struct SphereCap(pub f64);

impl RadialProfile for SphereCap {
    fn profile(&self, r: f64) -> Result<[f64; 3]> {
        let big = self.0;
        if !(r < big) {
            return Err(Error::InvalidArgument(format!("sphere cap radius {r} ≥ {big}")));
        }
        Ok(radial_jet(|x| (big * big - x * x).sqrt() - big, r))
    }
}

/// Paraboloid `z = k r² / 2`.
#[derive(Debug, Clone, Copy)]
pub struct Paraboloid(pub f64);

impl RadialProfile for Paraboloid {
    fn profile(&self, r: f64) -> Result<[f64; 3]> {
        Ok([0.5 * self.0 * r * r, self.0 * r, self.0])
    }
}

/// Rotational surface of curvature one in Euclidean space whose limit
/// gradient at the cone point is the circle of radius `rho`. With
/// `a = 1/√(1 + ρ²)` the profile is `r = a sin σ`,
/// `z = ∫₀^σ √(1 − a² cos² τ) dτ`.
#[derive(Debug, Clone, Copy)]
pub struct PeakedSphere(pub f64);

impl PeakedSphere {
    pub fn a(&self) -> f64 {
        (1.0 + self.0 * self.0).sqrt().recip()
    }
}

impl RadialProfile for PeakedSphere {
    fn profile(&self, r: f64) -> Result<[f64; 3]> {
        let a = self.a();
        if !(r > 0.0 && r < a) {
            return Err(Error::InvalidArgument(format!("peaked sphere radius {r} outside (0, {a})")));
        }
        let sigma = (r / a).asin();
        let integrand = |t: f64| (1.0 - a * a * t.cos().powi(2)).sqrt();
        // composite Simpson; the integrand is smooth and bounded
        let n = 2000;
        let h = sigma / n as f64;
        let mut acc = integrand(0.0) + integrand(sigma);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * h);
        }
        let z = acc * h / 3.0;
        // slope z_r = √(1 − a² cos² σ)/(a cos σ) as a jet in σ
        let s = Jet::variable(sigma, 2);
        let c = s.cos();
        let slope = (1.0 - a * a * c * c).sqrt() / (a * c);
        let drds = a * sigma.cos();
        Ok([z, slope.coeff(0), slope.coeff(1) / drds])
    }
}

/// Samples of a radial graph: every annulus radius `r` contributes rings at
/// `r (1 + 0.04 j)`, `j = −2..=2`, of `n_theta` points each.
pub fn radial_samples(
    model: WarpedModel,
    profile: &impl RadialProfile,
    radii: &[f64],
    n_theta: usize,
    with_derivatives: bool,
) -> Result<GraphSamples> {
    let mut annuli = Vec::with_capacity(radii.len());
    for &r0 in radii {
        let mut samples = Vec::with_capacity(5 * n_theta);
        for j in -2..=2 {
            let r = r0 * (1.0 + 0.04 * j as f64);
            let [z, z1, z2] = profile.profile(r)?;
            for i in 0..n_theta {
                // rings are staggered so that neighbours do not line up radially
                let th = TAU * (i as f64 + 0.5 * (j & 1) as f64) / n_theta as f64;
                let (sn, cs) = th.sin_cos();
                let (x, y) = (r * cs, r * sn);
                let tang = z1 / r;
                let hess = [
                    z2 * cs * cs + tang * sn * sn,
                    (z2 - tang) * cs * sn,
                    z2 * sn * sn + tang * cs * cs,
                ];
                samples.push(GraphSample {
                    x,
                    y,
                    z,
                    grad: with_derivatives.then_some([z1 * cs, z1 * sn]),
                    hess: with_derivatives.then_some(hess),
                });
            }
        }
        annuli.push(Annulus { radius: r0, samples });
    }
    GraphSamples::new(model, annuli)
}

/// Rows `v = const` of a strip solution as graph samples, one annulus per
/// row with radius the median distance to the origin.
pub fn samples_from_solution(sol: &StripSolution, problem: &Problem, rows: &[f64], n_u: usize) -> Result<GraphSamples> {
    let mut annuli = Vec::with_capacity(rows.len());
    for &v in rows {
        let mut samples = Vec::with_capacity(n_u);
        for i in 0..n_u {
            let d = sol.derivs(TAU * i as f64 / n_u as f64, v);
            let (r, s, t) = d.graph_hessian().ok_or_else(|| {
                Error::DegenerateMetric(format!("graph Jacobian vanishes on row v = {v}"))
            })?;
            samples.push(GraphSample {
                x: d.val[0],
                y: d.val[1],
                z: d.val[2],
                grad: Some([d.val[3], d.val[4]]),
                hess: Some([r, s, t]),
            });
        }
        let mut radii: Vec<f64> = samples.iter().map(|s| s.radius()).collect();
        radii.sort_by(f64::total_cmp);
        annuli.push(Annulus {
            radius: radii[radii.len() / 2],
            samples,
        });
    }
    GraphSamples::new(problem.model, annuli)
}

/// Extrinsic curvature `det II / det I` of the graph at a sample with second
/// derivatives.
pub fn graph_curvature(model: &WarpedModel, j: &Jet2) -> Result<f64> {
    let s = &j.state;
    model.check_domain(s.x, s.y, s.z)?;
    let pos = [s.x, s.y, s.z];
    let d1 = [[1.0, 0.0, s.p], [0.0, 1.0, s.q]];
    let d2 = [[0.0, 0.0, j.r], [0.0, 0.0, j.s], [0.0, 0.0, j.t]];
    let (first, second) = surface_forms(model, pos, [s.p, s.q], d1, d2);
    let det1 = first[0] * first[2] - first[1] * first[1];
    if !(det1 > 0.0) {
        return Err(Error::DegenerateMetric(format!("det I = {det1} at ({}, {})", s.x, s.y)));
    }
    Ok((second[0] * second[2] - second[1] * second[1]) / det1)
}

/// Curvature field and its largest deviation from a prescribed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub values: Vec<f64>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
}

pub fn extrinsic_curvature(samples: &GraphSamples, problem: &Problem) -> Result<CurvatureReport> {
    let mut out = CurvatureReport {
        values: Vec::with_capacity(samples.len()),
        max_abs_deviation: 0.0,
        max_rel_deviation: 0.0,
    };
    for s in samples.iter() {
        let j = s
            .jet()
            .ok_or_else(|| Error::InsufficientData("samples lack second derivatives".into()))?;
        let k = graph_curvature(&samples.model, &j)?;
        let kp = problem.curvature.eval(s.x, s.y, s.z)?;
        out.max_abs_deviation = out.max_abs_deviation.max((k - kp).abs());
        out.max_rel_deviation = out.max_rel_deviation.max((k - kp).abs() / kp.abs());
        out.values.push(k);
    }
    Ok(out)
}

/// Angle function `ν` at a sample with a gradient.
pub fn sample_nu(model: &WarpedModel, s: &GraphSample) -> Result<f64> {
    let st = s
        .state()
        .ok_or_else(|| Error::InsufficientData("sample without gradient".into()))?;
    Ok(unit_normal_angle(model, &st)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_space_form, Chart, CurvatureField};
    use approx::assert_relative_eq;

    fn cartesian() -> WarpedModel {
        make_space_form(0, Chart::Cartesian).unwrap()
    }

    #[test]
    fn puncture_is_rejected() {
        let s = GraphSample { x: 0.0, y: 0.0, z: 0.0, grad: None, hess: None };
        let r = GraphSamples::new(cartesian(), vec![Annulus { radius: 0.1, samples: vec![s] }]);
        assert!(r.is_err());
    }

    #[test]
    fn horosphere_slope_matches_closed_form() {
        for r in [0.05, 0.3, 0.7] {
            let [_, z1, _] = Horosphere.profile(r).unwrap();
            let w = (1.0f64 - r * r).sqrt();
            assert_relative_eq!(z1, r / ((1.0 - w) * w), max_relative = 1e-13);
        }
    }

    #[test]
    fn peaked_sphere_has_unit_curvature_and_limit_slope() {
        let ps = PeakedSphere(1.0);
        let g = radial_samples(cartesian(), &ps, &[0.05, 0.2], 16, true).unwrap();
        let pr = Problem::new(cartesian(), CurvatureField::constant(1.0));
        let rep = extrinsic_curvature(&g, &pr).unwrap();
        assert!(rep.max_abs_deviation < 1e-9, "{}", rep.max_abs_deviation);
        let [_, z1, _] = ps.profile(1e-6).unwrap();
        assert_relative_eq!(z1, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn knn_fit_recovers_quadratic() {
        let mut g = radial_samples(cartesian(), &Paraboloid(2.0), &[0.1, 0.2], 32, false).unwrap();
        g.complete_derivatives(KNN_DEFAULT).unwrap();
        for s in g.iter() {
            let [p, q] = s.grad.unwrap();
            assert_relative_eq!(p, 2.0 * s.x, epsilon = 1e-9);
            assert_relative_eq!(q, 2.0 * s.y, epsilon = 1e-9);
            let [r, ss, t] = s.hess.unwrap();
            assert_relative_eq!(r, 2.0, epsilon = 1e-7);
            assert!(ss.abs() < 1e-7);
            assert_relative_eq!(t, 2.0, epsilon = 1e-7);
        }
    }
}
