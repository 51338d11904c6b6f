use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cauchy::CauchyData;
use crate::error::{Error, Result};
use crate::fourier::{SpectralGrid, TrigSeries};
use crate::geometry::{CoefficientSource, Jet2, Problem, State, IP, IQ, IX, IY};
use crate::jet::Jet;
use crate::monge_ampere::{first_order_residual, laplacian_rhs, residual};

/// Strip height: fixed, or `safety / g` from the growth ratio `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Height {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Fourier order `M`.
    pub order: usize,
    /// Highest Taylor level `N`.
    pub levels: usize,
    pub height: Height,
    pub safety: f64,
    /// Exponential filter `exp(−36 (m/M)^16)` applied to every new level.
    pub filter: bool,
    /// Modes of marched levels whose modulus falls below `noise_floor`
    /// times the largest Cauchy data mode are damped smoothly to zero.
    /// Without it roundoff in mode `m` grows like `m^k / k!` and swamps the
    /// growth ratio.
    pub noise_floor: f64,
    /// Collocation grid padding: the grid has `padding · (M + 1)` points.
    pub padding: usize,
    /// Collocation grid `(n_u, n_v)` for the residual report.
    pub report_grid: (usize, usize),
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            order: 64,
            levels: 24,
            height: Height::Auto,
            safety: 0.5,
            filter: false,
            noise_floor: 1e-12,
            padding: 4,
            report_grid: (64, 16),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationReport {
    pub n_u: usize,
    pub n_v: usize,
    /// `sup |Δ𝐳 − h(𝐳, 𝐳_u, 𝐳_v)|`.
    pub max_system: f64,
    /// `sup` of the first-order defects.
    pub max_first_order: f64,
    /// `sup |A r + 2B s + C t + rt − s² − E| / (1 + |E|)`.
    pub max_equation: f64,
    pub min_discriminant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    /// `max_k (‖c_{k+2}‖ / ‖c_k‖)^{1/2}`, the per-level growth used to cap
    /// the strip height.
    pub growth_ratio: f64,
    /// `max_k ‖c_{k+1}‖ / ‖c_k‖`. Series with a parity structure (odd
    /// levels nearly vanishing) make this far larger than the actual
    /// growth, so it is reported but not used.
    pub one_step_ratio: f64,
    /// `safety / growth_ratio`.
    pub recommended_height: f64,
    pub level_norms: Vec<f64>,
    /// Largest imaginary part met when synthesizing levels on the grid.
    pub max_imag: f64,
    pub collocation: CollocationReport,
}

/// Value and first/second partial derivatives of `𝐳` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivs {
    pub val: [f64; 5],
    pub du: [f64; 5],
    pub dv: [f64; 5],
    pub duu: [f64; 5],
    pub duv: [f64; 5],
    pub dvv: [f64; 5],
}

impl Derivs {
    pub fn state(&self) -> State {
        State::from_array(self.val)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.val[0], self.val[1], self.val[2]]
    }

    fn pos3(a: &[f64; 5]) -> [f64; 3] {
        [a[0], a[1], a[2]]
    }

    /// `[ψ_u, ψ_v]` and `[ψ_uu, ψ_uv, ψ_vv]`.
    pub fn surface_derivatives(&self) -> ([[f64; 3]; 2], [[f64; 3]; 3]) {
        (
            [Self::pos3(&self.du), Self::pos3(&self.dv)],
            [Self::pos3(&self.duu), Self::pos3(&self.duv), Self::pos3(&self.dvv)],
        )
    }

    /// Graph second derivatives `(r, s, t)` recovered through the
    /// Jacobian of `(u, v) ↦ (x, y)`; `None` where it degenerates.
    pub fn graph_hessian(&self) -> Option<(f64, f64, f64)> {
        let (xu, yu, xv, yv) = (self.du[IX], self.du[IY], self.dv[IX], self.dv[IY]);
        let det = xu * yv - xv * yu;
        let scale = (xu * xu + yu * yu + xv * xv + yv * yv).max(f64::MIN_POSITIVE);
        if det.abs() <= 1e-12 * scale {
            return None;
        }
        // [f_u, f_v] = J [f_x, f_y] with J = [[x_u, y_u], [x_v, y_v]].
        let solve = |fu: f64, fv: f64| ((yv * fu - yu * fv) / det, (-xv * fu + xu * fv) / det);
        let (r, s1) = solve(self.du[IP], self.dv[IP]);
        let (s2, t) = solve(self.du[IQ], self.dv[IQ]);
        Some((r, 0.5 * (s1 + s2), t))
    }
}

/// The marched field on the strip `0 ≤ v ≤ R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripSolution {
    pub order: usize,
    pub height: f64,
    /// `levels[k][c]` is the `v^k` coefficient of component `c`.
    pub levels: Vec<[TrigSeries; 5]>,
    pub diagnostics: SolveDiagnostics,
    #[serde(skip)]
    problem: Option<Problem>,
}

fn level_norm(level: &[TrigSeries; 5]) -> f64 {
    level.iter().map(|s| s.coeff_norm().powi(2)).sum::<f64>().sqrt()
}

fn max_mode(level: &[TrigSeries; 5]) -> f64 {
    level
        .iter()
        .flat_map(|s| s.cos_coeffs().iter().zip(s.sin_coeffs()))
        .fold(0.0f64, |acc, (a, b)| acc.max(a.hypot(*b)))
}

fn clean(level: &mut [TrigSeries; 5], floor: f64, opts: &SolverOptions) {
    let m = opts.order as f64;
    if opts.filter {
        for s in level.iter_mut() {
            s.filter(|k| (-36.0 * (k as f64 / m).powi(16)).exp());
        }
    }
    // Modes are damped as a whole, by a weight that is smooth in their
    // modulus, so that nearby inputs give nearby outputs and the cleaning
    // commutes with shifts.
    if floor > 0.0 {
        for s in level.iter_mut() {
            for k in 0..=s.order() {
                let r = s.cos_coeffs()[k].hypot(s.sin_coeffs()[k]) / floor;
                let w = -(-r.powi(8)).exp_m1();
                s.cos_coeffs_mut()[k] *= w;
                s.sin_coeffs_mut()[k] *= w;
            }
        }
    }
}

/// Marches the Cauchy data `levels` Taylor levels into the strip.
pub fn solve(data: &CauchyData, problem: &Problem, opts: &SolverOptions) -> Result<StripSolution> {
    let (m, n_levels) = (opts.order, opts.levels);
    if m < 4 || n_levels < 4 {
        return Err(Error::InvalidArgument(format!(
            "orders must be at least 4 (M = {m}, N = {n_levels})"
        )));
    }
    if let Height::Fixed(r) = opts.height {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("strip height {r}")));
        }
    }
    if !(opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("safety {}", opts.safety)));
    }
    let npad = opts.padding.max(3) * (m + 1);
    let grid = SpectralGrid::new(npad);
    let mut levels: Vec<[TrigSeries; 5]> = vec![
        data.values.clone().map(|s| s.resized(m)),
        data.normal.clone().map(|s| s.resized(m)),
    ];
    let floor = opts.noise_floor * max_mode(&levels[0]).max(max_mode(&levels[1]));
    let mut max_imag: f64 = 0.0;
    let mut synth = |level: &[TrigSeries; 5]| -> ([Vec<f64>; 5], [Vec<f64>; 5]) {
        let mut vals: [Vec<f64>; 5] = Default::default();
        let mut ders: [Vec<f64>; 5] = Default::default();
        for c in 0..5 {
            let (v, im) = grid.to_grid_checked(&level[c]);
            let (d, im2) = grid.to_grid_checked(&level[c].derivative());
            max_imag = max_imag.max(im).max(im2);
            vals[c] = v;
            ders[c] = d;
        }
        (vals, ders)
    };
    let mut vals = Vec::with_capacity(n_levels + 1);
    let mut ders = Vec::with_capacity(n_levels + 1);
    for level in &levels {
        let (v, d) = synth(level);
        vals.push(v);
        ders.push(d);
    }

    for k in 0..=n_levels - 2 {
        let len = k + 1;
        let rows: Vec<[f64; 5]> = (0..npad)
            .into_par_iter()
            .map(|i| {
                let mut z = [Jet::zeros(len); 5];
                let mut zu = [Jet::zeros(len); 5];
                let mut zv = [Jet::zeros(len); 5];
                for c in 0..5 {
                    let (a, b, d) = (z[c].coeffs_mut(), zu[c].coeffs_mut(), zv[c].coeffs_mut());
                    for j in 0..len {
                        a[j] = vals[j][c][i];
                        b[j] = ders[j][c][i];
                        d[j] = (j + 1) as f64 * vals[j + 1][c][i];
                    }
                }
                let co = problem.coefficients_at(z)?;
                let rhs = laplacian_rhs(z, zu, zv, &co)?;
                Ok(rhs.map(|r| r.coeff(k)))
            })
            .collect::<Result<_>>()?;
        let denom = ((k + 1) * (k + 2)) as f64;
        let mut next: [TrigSeries; 5] = std::array::from_fn(|_| TrigSeries::zeros(m));
        for c in 0..5 {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let h = grid.from_grid(&col, m);
            let prev = &levels[k][c];
            let mut s = TrigSeries::zeros(m);
            for mode in 0..=m {
                let m2 = (mode * mode) as f64;
                s.cos_coeffs_mut()[mode] = (h.cos_coeffs()[mode] + m2 * prev.cos_coeffs()[mode]) / denom;
                s.sin_coeffs_mut()[mode] = (h.sin_coeffs()[mode] + m2 * prev.sin_coeffs()[mode]) / denom;
            }
            next[c] = s;
        }
        clean(&mut next, floor, opts);
        let (v, d) = synth(&next);
        vals.push(v);
        ders.push(d);
        levels.push(next);
    }

    let level_norms: Vec<f64> = levels.iter().map(level_norm).collect();
    let ratio = |step: usize| {
        level_norms
            .iter()
            .zip(&level_norms[step..])
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| (b / a).powf(1.0 / step as f64))
            .fold(0.0, f64::max)
    };
    let growth_ratio = ratio(2);
    let one_step_ratio = ratio(1);
    let recommended_height = if growth_ratio > 0.0 {
        opts.safety / growth_ratio
    } else {
        f64::INFINITY
    };
    let height = match opts.height {
        Height::Auto => recommended_height,
        Height::Fixed(r) => {
            if growth_ratio * r > 1.0 {
                return Err(Error::BlowUp {
                    growth: growth_ratio,
                    r,
                });
            }
            r
        }
    };
    if !height.is_finite() {
        return Err(Error::InvalidArgument(
            "flat data: strip height must be given explicitly".into(),
        ));
    }
    let mut sol = StripSolution {
        order: m,
        height,
        levels,
        diagnostics: SolveDiagnostics {
            growth_ratio,
            one_step_ratio,
            recommended_height,
            level_norms,
            max_imag,
            collocation: CollocationReport {
                n_u: 0,
                n_v: 0,
                max_system: 0.0,
                max_first_order: 0.0,
                max_equation: 0.0,
                min_discriminant: 0.0,
            },
        },
        problem: Some(problem.clone()),
    };
    let (nu, nv) = opts.report_grid;
    sol.diagnostics.collocation = sol.collocation(problem, nu, nv, 0.0, height)?;
    Ok(sol)
}

impl StripSolution {
    pub fn problem(&self) -> Option<&Problem> {
        self.problem.as_ref()
    }

    pub fn attach_problem(&mut self, problem: Problem) {
        self.problem = Some(problem);
    }

    /// Number of Taylor levels minus one.
    pub fn taylor_order(&self) -> usize {
        self.levels.len() - 1
    }

    /// Derivatives at `(u, v)` for every `v` in `vs`.
    pub fn column(&self, u: f64, vs: &[f64]) -> Vec<Derivs> {
        let nl = self.levels.len();
        // jets[j][c] = (c_j, c_j', c_j''/2) at u
        let jets: Vec<[[f64; 3]; 5]> = self
            .levels
            .iter()
            .map(|lv| {
                std::array::from_fn(|c| {
                    let j = lv[c].eval_jet(u, 3);
                    [j.coeff(0), j.coeff(1), 2.0 * j.coeff(2)]
                })
            })
            .collect();
        vs.iter()
            .map(|&v| {
                let mut d = Derivs::default();
                for c in 0..5 {
                    let mut acc = [[0.0; 3]; 3]; // [u-order][v-order]
                    for j in (0..nl).rev() {
                        let a = jets[j][c];
                        for uo in 0..3 {
                            acc[uo][2] = acc[uo][2] * v + 2.0 * acc[uo][1];
                            acc[uo][1] = acc[uo][1] * v + acc[uo][0];
                            acc[uo][0] = acc[uo][0] * v + a[uo];
                        }
                    }
                    d.val[c] = acc[0][0];
                    d.du[c] = acc[1][0];
                    d.duu[c] = acc[2][0];
                    d.dv[c] = acc[0][1];
                    d.duv[c] = acc[1][1];
                    d.dvv[c] = acc[0][2];
                }
                d
            })
            .collect()
    }

    pub fn derivs(&self, u: f64, v: f64) -> Derivs {
        self.column(u, &[v])[0]
    }

    pub fn eval(&self, u: f64, v: f64) -> [f64; 5] {
        self.derivs(u, v).val
    }

    /// Coefficients of `(u, v) ↦ 𝐳(u + delta, v)`.
    pub fn shifted(&self, delta: f64) -> StripSolution {
        let mut out = self.clone();
        for lv in out.levels.iter_mut() {
            for s in lv.iter_mut() {
                *s = s.shifted(delta);
            }
        }
        out
    }

    /// Largest coefficient difference over matching levels.
    pub fn max_coeff_diff(&self, other: &StripSolution) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(s, t)| s.max_coeff_diff(t)))
            .fold(0.0, f64::max)
    }

    /// Residuals of the elliptic system, the first-order system and the
    /// equation on `n_u × n_v` points with `v_j = v0 + (v1 − v0)(j + 1)/n_v`.
    pub fn collocation(
        &self,
        problem: &Problem,
        n_u: usize,
        n_v: usize,
        v0: f64,
        v1: f64,
    ) -> Result<CollocationReport> {
        let vs: Vec<f64> = (0..n_v)
            .map(|j| v0 + (v1 - v0) * (j + 1) as f64 / n_v as f64)
            .collect();
        let cols: Vec<[f64; 4]> = (0..n_u)
            .into_par_iter()
            .map(|i| {
                let u = TAU * i as f64 / n_u as f64;
                let mut out = [0.0, 0.0, 0.0, f64::INFINITY];
                for d in self.column(u, &vs) {
                    let st = d.state();
                    let co = problem.coefficients(&st)?;
                    let rhs = laplacian_rhs(d.val, d.du, d.dv, &co)?;
                    for c in 0..5 {
                        out[0] = out[0].max((d.duu[c] + d.dvv[c] - rhs[c]).abs());
                    }
                    let fo = first_order_residual(d.du, d.dv, &co)?;
                    out[1] = fo.iter().fold(out[1], |a, b| a.max(b.abs()));
                    if let Some((r, s, t)) = d.graph_hessian() {
                        let res = residual(&Jet2 { state: st, r, s, t }, &co);
                        out[2] = out[2].max(res.abs() / (1.0 + co.e.abs()));
                    }
                    out[3] = out[3].min(co.d);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let fold = |k: usize| cols.iter().map(|c| c[k]).fold(0.0, f64::max);
        Ok(CollocationReport {
            n_u,
            n_v,
            max_system: fold(0),
            max_first_order: fold(1),
            max_equation: fold(2),
            min_discriminant: cols.iter().map(|c| c[3]).fold(f64::INFINITY, f64::min),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::PeriodicCurve;
    use crate::geometry::{make_space_form, Chart, CurvatureField};
    use crate::solver::cauchy_data;

    fn circle_problem() -> (Problem, CauchyData) {
        let pr = Problem::new(make_space_form(0, Chart::Cartesian).unwrap(), CurvatureField::constant(1.0));
        let data = cauchy_data(&PeriodicCurve::circle(1.0, true), &pr, 16).unwrap();
        (pr, data)
    }

    fn small() -> SolverOptions {
        SolverOptions {
            order: 16,
            levels: 12,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn boundary_is_reproduced() {
        let (pr, data) = circle_problem();
        let sol = solve(&data, &pr, &small()).unwrap();
        for u in [0.0, 1.0, 2.5] {
            let z = sol.eval(u, 0.0);
            assert_eq!(&z[..3], &[0.0; 3]);
            assert!((z[3] - u.cos()).abs() < 1e-15 && (z[4] + u.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let (pr, data) = circle_problem();
        let sol = solve(&data, &pr, &small()).unwrap();
        let (u, v, h) = (0.4, 0.5 * sol.height, 1e-4);
        let d = sol.derivs(u, v);
        for c in 0..5 {
            let du = (sol.eval(u + h, v)[c] - sol.eval(u - h, v)[c]) / (2.0 * h);
            let dv = (sol.eval(u, v + h)[c] - sol.eval(u, v - h)[c]) / (2.0 * h);
            let duv = (sol.eval(u + h, v + h)[c] - sol.eval(u + h, v - h)[c] - sol.eval(u - h, v + h)[c]
                + sol.eval(u - h, v - h)[c])
                / (4.0 * h * h);
            assert!((du - d.du[c]).abs() < 1e-7);
            assert!((dv - d.dv[c]).abs() < 1e-7);
            assert!((duv - d.duv[c]).abs() < 1e-5);
        }
    }

    #[test]
    fn fixed_height_beyond_growth_is_rejected() {
        let (pr, data) = circle_problem();
        let opts = SolverOptions {
            height: Height::Fixed(100.0),
            ..small()
        };
        assert!(matches!(solve(&data, &pr, &opts), Err(Error::BlowUp { .. })));
        let tiny = SolverOptions {
            levels: 3,
            ..small()
        };
        assert!(matches!(solve(&data, &pr, &tiny), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rotational_levels_stay_band_limited() {
        let (pr, data) = circle_problem();
        let sol = solve(&data, &pr, &small()).unwrap();
        for lv in &sol.levels {
            let scale = lv.iter().map(|s| s.coeff_norm()).fold(0.0, f64::max);
            for s in lv {
                let high = s.resized(16).cos_coeffs()[2..].iter().chain(&s.sin_coeffs()[2..])
                    .fold(0.0f64, |a, b| a.max(b.abs()));
                assert!(high <= 1e-13 * scale, "{high} vs {scale}");
            }
        }
        assert!(sol.diagnostics.max_imag < 1e-12);
    }
}
