//! Warped-product charts `f(z) λ(x,y) (dx² + dy²) + dz²` of the space forms
//! and the coefficient algebra of the prescribed-curvature Monge-Ampère
//! equation
//!
//! ```text
//! A r + 2B s + C t + r t − s² = E
//! ```
//!
//! with `p = z_x`, `q = z_y`, `r = z_xx`, `s = z_xy`, `t = z_yy`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, ParseError, Var};
use crate::jet::{Jet, Real};

/// Default distance kept from chart boundaries.
pub const DEFAULT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Cartesian,
    CylindricalH3,
    StereographicS3,
    HalfspaceH3,
}

impl Chart {
    pub const ALL: [Chart; 4] = [
        Chart::Cartesian,
        Chart::CylindricalH3,
        Chart::StereographicS3,
        Chart::HalfspaceH3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Chart::Cartesian => "cartesian",
            Chart::CylindricalH3 => "cylindrical_h3",
            Chart::StereographicS3 => "stereographic_s3",
            Chart::HalfspaceH3 => "halfspace_h3",
        }
    }

    /// The curvature constant the chart realizes.
    pub fn curvature(self) -> i32 {
        match self {
            Chart::Cartesian => 0,
            Chart::CylindricalH3 | Chart::HalfspaceH3 => -1,
            Chart::StereographicS3 => 1,
        }
    }

    /// Curvature sign of the base surface (`λ = (1 + κ|x|²/4)⁻²`).
    fn base_kappa(self) -> f64 {
        match self {
            Chart::CylindricalH3 => -1.0,
            Chart::StereographicS3 => 1.0,
            Chart::Cartesian | Chart::HalfspaceH3 => 0.0,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Chart::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::UnknownChart(s.to_string()))
    }
}

/// `f`, `f'`, `f''` at one height.
#[derive(Debug, Clone, Copy)]
pub struct Warp<T> {
    pub f: T,
    pub f1: T,
    pub f2: T,
}

/// `λ` with its first and second partials.
#[derive(Debug, Clone, Copy)]
pub struct Conformal<T> {
    pub l: T,
    pub lx: T,
    pub ly: T,
    pub lxx: T,
    pub lxy: T,
    pub lyy: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedModel {
    c: i32,
    chart: Chart,
    margin: f64,
}

/// Builds the chart model, checking that it realizes curvature `c`.
pub fn make_space_form(c: i32, chart: Chart) -> Result<WarpedModel> {
    let expected = chart.curvature();
    if c != expected {
        return Err(Error::ChartMismatch {
            chart: chart.name(),
            expected,
            got: c,
        });
    }
    Ok(WarpedModel {
        c,
        chart,
        margin: DEFAULT_MARGIN,
    })
}

impl WarpedModel {
    pub fn c(&self) -> i32 {
        self.c
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn warp<T: Real>(&self, z: T) -> Warp<T> {
        match self.chart {
            Chart::Cartesian => Warp {
                f: T::from_f64(1.0),
                f1: T::from_f64(0.0),
                f2: T::from_f64(0.0),
            },
            Chart::CylindricalH3 => {
                let (sh, ch) = ((z * 2.0).sinh(), (z * 2.0).cosh());
                Warp {
                    f: (ch + 1.0) * 0.5,
                    f1: sh,
                    f2: ch * 2.0,
                }
            }
            Chart::StereographicS3 => {
                let (sn, cs) = ((z * 2.0).sin(), (z * 2.0).cos());
                Warp {
                    f: (cs + 1.0) * 0.5,
                    f1: -sn,
                    f2: cs * -2.0,
                }
            }
            Chart::HalfspaceH3 => {
                let e = (z * -2.0).exp();
                Warp {
                    f: e,
                    f1: e * -2.0,
                    f2: e * 4.0,
                }
            }
        }
    }

    pub fn conformal<T: Real>(&self, x: T, y: T) -> Conformal<T> {
        let kappa = self.chart.base_kappa();
        if kappa == 0.0 {
            let zero = T::from_f64(0.0);
            return Conformal {
                l: T::from_f64(1.0),
                lx: zero,
                ly: zero,
                lxx: zero,
                lxy: zero,
                lyy: zero,
            };
        }
        let m = (x * x + y * y) * (0.25 * kappa) + 1.0;
        let mi = m.recip();
        let mi2 = mi * mi;
        let mi3 = mi2 * mi;
        let mi4 = mi2 * mi2;
        let k2 = 1.5 * kappa * kappa;
        Conformal {
            l: mi2,
            lx: x * mi3 * -kappa,
            ly: y * mi3 * -kappa,
            lxx: mi3 * -kappa + x * x * mi4 * k2,
            lxy: x * y * mi4 * k2,
            lyy: mi3 * -kappa + y * y * mi4 * k2,
        }
    }

    /// Strict membership with the configured margin.
    pub fn in_domain(&self, x: f64, y: f64, z: f64) -> bool {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return false;
        }
        match self.chart {
            Chart::Cartesian | Chart::HalfspaceH3 => true,
            Chart::CylindricalH3 => 1.0 - (x * x + y * y) / 4.0 > self.margin,
            Chart::StereographicS3 => z.abs() < FRAC_PI_2 - self.margin,
        }
    }

    pub fn check_domain(&self, x: f64, y: f64, z: f64) -> Result<()> {
        if self.in_domain(x, y, z) {
            Ok(())
        } else {
            Err(Error::Domain {
                chart: self.chart.name(),
                x,
                y,
                z,
            })
        }
    }

    /// Human-readable domain description.
    pub fn domain_description(&self) -> &'static str {
        match self.chart {
            Chart::Cartesian | Chart::HalfspaceH3 => "unbounded",
            Chart::CylindricalH3 => "x² + y² < 4",
            Chart::StereographicS3 => "|z| < π/2",
        }
    }

    /// The metric factor `φ = f λ` and its partials `(φ_x, φ_y, φ_z)`.
    pub fn metric_factor(&self, x: f64, y: f64, z: f64) -> (f64, [f64; 3]) {
        let w = self.warp(z);
        let l = self.conformal(x, y);
        (w.f * l.l, [w.f * l.lx, w.f * l.ly, w.f1 * l.l])
    }

    /// Inner product of two chart vectors at `pos`.
    pub fn inner(&self, pos: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
        let (phi, _) = self.metric_factor(pos[0], pos[1], pos[2]);
        phi * (a[0] * b[0] + a[1] * b[1]) + a[2] * b[2]
    }

    /// Levi-Civita connection applied to a pair of vectors: `Γ^k(a, b)`.
    pub fn christoffel(&self, pos: [f64; 3], a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        let (phi, [px, py, pz]) = self.metric_factor(pos[0], pos[1], pos[2]);
        let (gx, gy, gz) = (px / (2.0 * phi), py / (2.0 * phi), pz / (2.0 * phi));
        [
            gx * (a[0] * b[0] - a[1] * b[1])
                + gy * (a[0] * b[1] + a[1] * b[0])
                + gz * (a[0] * b[2] + a[2] * b[0]),
            -gy * (a[0] * b[0] - a[1] * b[1])
                + gx * (a[0] * b[1] + a[1] * b[0])
                + gz * (a[1] * b[2] + a[2] * b[1]),
            -0.5 * pz * (a[0] * b[0] + a[1] * b[1]),
        ]
    }

    /// Exterior product `a × b` for the warped metric at `pos`.
    pub fn cross(&self, pos: [f64; 3], a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        let (phi, _) = self.metric_factor(pos[0], pos[1], pos[2]);
        // Orthonormal frame e_i = (φ^{-1/2}∂x, φ^{-1/2}∂y, ∂z).
        let s = phi.sqrt();
        let (ah, bh) = ([a[0] * s, a[1] * s, a[2]], [b[0] * s, b[1] * s, b[2]]);
        let c = [
            ah[1] * bh[2] - ah[2] * bh[1],
            ah[2] * bh[0] - ah[0] * bh[2],
            ah[0] * bh[1] - ah[1] * bh[0],
        ];
        [c[0] / s, c[1] / s, c[2]]
    }

    /// Position in the ambient picture: identity for ℝ³, `(x, y, e^z)` in
    /// the upper half-space, the radius-2 Poincaré ball for the cylindrical
    /// ℍ³ chart and stereographic ℝ³ for 𝕊³.
    pub fn to_ambient<T: Real>(&self, pos: [T; 3]) -> [T; 3] {
        let [x, y, z] = pos;
        match self.chart {
            Chart::Cartesian => pos,
            Chart::HalfspaceH3 => [x, y, z.exp()],
            Chart::CylindricalH3 => {
                // Point of the totally geodesic plane in the hyperboloid model,
                // pushed a distance z along its unit normal.
                let (bx, by) = (x * 0.5, y * 0.5);
                let den = (bx * bx + by * by - 1.0) * -1.0;
                let p0 = (bx * bx + by * by + 1.0) / den;
                let (p1, p2) = (bx * 2.0 / den, by * 2.0 / den);
                let (ch, sh) = (z.cosh(), z.sinh());
                let y0 = ch * p0;
                let scale = (y0 + 1.0).recip() * 2.0;
                [ch * p1 * scale, ch * p2 * scale, sh * scale]
            }
            Chart::StereographicS3 => {
                let s4 = (x * x + y * y) * 0.25;
                let den = (s4 + 1.0).recip();
                let p0 = (s4 - 1.0) * den;
                let (p1, p2) = (x * den, y * den);
                let (cs, sn) = (z.cos(), z.sin());
                let y0 = cs * p0;
                let scale = (y0 * -1.0 + 1.0).recip() * 2.0;
                [cs * p1 * scale, cs * p2 * scale, sn * scale]
            }
        }
    }

    /// Euclidean unit vector of the ambient picture along the pushed-forward
    /// chart vector `dir` at `pos`.
    pub fn ambient_direction(&self, pos: [f64; 3], dir: [f64; 3]) -> [f64; 3] {
        let arg: [Jet; 3] =
            std::array::from_fn(|i| Jet::from_coeffs(&[pos[i], dir[i]]));
        let img = self.to_ambient(arg);
        let v = [img[0].coeff(1), img[1].coeff(1), img[2].coeff(1)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

/// A positive curvature field given by an expression in `(x, y, z)`, with
/// symbolic first partials.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    expr: Expr,
    grad: [Expr; 3],
}

impl CurvatureField {
    pub fn new(expr: Expr) -> Self {
        let grad = [expr.diff(Var::X), expr.diff(Var::Y), expr.diff(Var::Z)];
        CurvatureField { expr, grad }
    }

    pub fn parse(src: &str) -> std::result::Result<Self, ParseError> {
        Ok(CurvatureField::new(Expr::parse(src)?))
    }

    pub fn constant(k: f64) -> Self {
        CurvatureField::new(Expr::Num(k))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn partial(&self, var: Var) -> &Expr {
        &self.grad[var.index()]
    }

    pub fn eval<T: Real>(&self, x: T, y: T, z: T) -> Result<T> {
        self.expr
            .eval([x, y, z])
            .map_err(|e| Error::Expr(e.to_string()))
    }

    /// Value and `(𝒦_x, 𝒦_y, 𝒦_z)`; fails unless the value is positive.
    pub fn eval_with_grad<T: Real>(&self, x: T, y: T, z: T) -> Result<(T, [T; 3])> {
        let k = self.eval(x, y, z)?;
        if k.value() <= 0.0 {
            return Err(Error::NonpositiveCurvature {
                value: k.value(),
                x: x.value(),
                y: y.value(),
                z: z.value(),
            });
        }
        let mut g = [k; 3];
        for (gi, e) in g.iter_mut().zip(&self.grad) {
            *gi = match e.as_const() {
                Some(c) => T::from_f64(c),
                None => e
                    .eval([x, y, z])
                    .map_err(|e| Error::Expr(e.to_string()))?,
            };
        }
        Ok((k, g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
}

impl State {
    pub fn new(x: f64, y: f64, z: f64, p: f64, q: f64) -> Self {
        State { x, y, z, p, q }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x, self.y, self.z, self.p, self.q]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        State::new(a[0], a[1], a[2], a[3], a[4])
    }
}

/// A state together with the second derivatives `(r, s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2 {
    pub state: State,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

/// Index of each variable in gradient arrays.
pub const IX: usize = 0;
pub const IY: usize = 1;
pub const IZ: usize = 2;
pub const IP: usize = 3;
pub const IQ: usize = 4;

/// `A, B, C, E, 𝒟` with their gradients in `(x, y, z, p, q)`.
#[derive(Debug, Clone, Copy)]
pub struct Coefficients<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub e: T,
    pub d: T,
    pub grad_a: [T; 5],
    pub grad_b: [T; 5],
    pub grad_c: [T; 5],
    pub grad_e: [T; 5],
    pub grad_d: [T; 5],
}

impl<T: Copy> Coefficients<T> {
    /// Rows `A, B, C, E, 𝒟`; columns `x, y, z, p, q`.
    pub fn table(&self) -> [[T; 5]; 5] {
        [self.grad_a, self.grad_b, self.grad_c, self.grad_e, self.grad_d]
    }

    pub fn values(&self) -> [T; 5] {
        [self.a, self.b, self.c, self.e, self.d]
    }
}

/// Anything able to produce coefficients at a state.
pub trait CoefficientSource {
    fn coefficients(&self, s: &State) -> Result<Coefficients>;
}

/// A chart together with the prescribed curvature.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: WarpedModel,
    pub curvature: CurvatureField,
}

impl Problem {
    pub fn new(model: WarpedModel, curvature: CurvatureField) -> Self {
        Problem { model, curvature }
    }

    /// Coefficients over any scalar type; domain and positivity are checked
    /// on leading values.
    pub fn coefficients_at<T: Real>(&self, s: [T; 5]) -> Result<Coefficients<T>> {
        let [x, y, z, p, q] = s;
        self.model.check_domain(x.value(), y.value(), z.value())?;
        let (k, kg) = self.curvature.eval_with_grad(x, y, z)?;
        let w = self.model.warp(z);
        let l = self.model.conformal(x, y);
        let zero = T::from_f64(0.0);

        let inv_l = l.l.recip();
        let ax = l.lx * inv_l * 0.5;
        let ay = l.ly * inv_l * 0.5;
        let inv_2l2 = inv_l * inv_l * 0.5;
        let ax_x = (l.lxx * l.l - l.lx * l.lx) * inv_2l2;
        let ax_y = (l.lxy * l.l - l.lx * l.ly) * inv_2l2;
        let ay_x = ax_y;
        let ay_y = (l.lyy * l.l - l.ly * l.ly) * inv_2l2;
        let inv_f = w.f.recip();
        let g = w.f1 * inv_f;
        let g_z = (w.f2 * w.f - w.f1 * w.f1) * inv_f * inv_f;
        let h = w.f1 * l.l * 0.5;
        let (h_x, h_y, h_z) = (w.f1 * l.lx * 0.5, w.f1 * l.ly * 0.5, w.f2 * l.l * 0.5);

        let a = p * ax - q * ay - q * q * g - h;
        let b = p * ay + q * ax + p * q * g;
        let c = -(p * ax) + q * ay - p * p * g - h;
        let grad_a = [
            p * ax_x - q * ay_x - h_x,
            p * ax_y - q * ay_y - h_y,
            -(q * q * g_z) - h_z,
            ax,
            -ay - q * g * 2.0,
        ];
        let grad_b = [
            p * ay_x + q * ax_x,
            p * ay_y + q * ax_y,
            p * q * g_z,
            ay + q * g,
            ax + p * g,
        ];
        let grad_c = [
            -(p * ax_x) + q * ay_x - h_x,
            -(p * ax_y) + q * ay_y - h_y,
            -(p * p * g_z) - h_z,
            -ax - p * g * 2.0,
            ay,
        ];

        let fl = w.f * l.l;
        let big_w = fl + p * p + q * q;
        let grad_w = [w.f * l.lx, w.f * l.ly, w.f1 * l.l, p * 2.0, q * 2.0];
        let d = k * big_w * big_w;
        let kg5 = [kg[0], kg[1], kg[2], zero, zero];
        let grad_d: [T; 5] =
            std::array::from_fn(|i| kg5[i] * big_w * big_w + k * big_w * grad_w[i] * 2.0);
        let e = d - a * c + b * b;
        let grad_e: [T; 5] = std::array::from_fn(|i| {
            grad_d[i] - grad_a[i] * c - a * grad_c[i] + b * grad_b[i] * 2.0
        });
        if d.value() <= 0.0 {
            return Err(Error::Ellipticity { value: d.value() });
        }
        Ok(Coefficients {
            a,
            b,
            c,
            e,
            d,
            grad_a,
            grad_b,
            grad_c,
            grad_e,
            grad_d,
        })
    }
}

impl CoefficientSource for Problem {
    fn coefficients(&self, s: &State) -> Result<Coefficients> {
        self.coefficients_at(s.to_array())
    }
}

/// Coefficients of the equation at `s`.
pub fn ma_coefficients(
    model: &WarpedModel,
    curvature: &CurvatureField,
    s: &State,
) -> Result<Coefficients> {
    Problem::new(*model, curvature.clone()).coefficients(s)
}

/// Upward unit normal (chart components) and angle function `ν`.
pub fn unit_normal_angle(model: &WarpedModel, s: &State) -> Result<([f64; 3], f64)> {
    model.check_domain(s.x, s.y, s.z)?;
    let (fl, _) = model.metric_factor(s.x, s.y, s.z);
    let g2 = s.p * s.p + s.q * s.q;
    let norm = (fl * fl + fl * g2).sqrt();
    let n = [-s.p / norm, -s.q / norm, fl / norm];
    let nu = (fl / (fl + g2)).sqrt();
    Ok((n, nu))
}

/// First and second fundamental forms `([E, F, G], [L, M, N])` of a
/// parametrized surface at `pos` with gradient `(p, q)`, using the upward
/// unit normal. `d1 = [ψ_u, ψ_v]`, `d2 = [ψ_uu, ψ_uv, ψ_vv]`.
pub fn surface_forms(
    model: &WarpedModel,
    pos: [f64; 3],
    grad: [f64; 2],
    d1: [[f64; 3]; 2],
    d2: [[f64; 3]; 3],
) -> ([f64; 3], [f64; 3]) {
    let first = [
        model.inner(pos, d1[0], d1[0]),
        model.inner(pos, d1[0], d1[1]),
        model.inner(pos, d1[1], d1[1]),
    ];
    let (fl, _) = model.metric_factor(pos[0], pos[1], pos[2]);
    let scale = fl / (fl * fl + fl * (grad[0] * grad[0] + grad[1] * grad[1])).sqrt();
    let pairs = [(0, 0), (0, 1), (1, 1)];
    let second = std::array::from_fn(|k| {
        let (i, j) = pairs[k];
        let g = model.christoffel(pos, d1[i], d1[j]);
        let cov: [f64; 3] = std::array::from_fn(|c| d2[k][c] + g[c]);
        scale * (cov[2] - grad[0] * cov[0] - grad[1] * cov[1])
    });
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn models() -> Vec<WarpedModel> {
        Chart::ALL
            .iter()
            .map(|&ch| make_space_form(ch.curvature(), ch).unwrap())
            .collect()
    }

    #[test]
    fn chart_mismatch_and_unknown() {
        assert!(matches!(
            make_space_form(1, Chart::HalfspaceH3),
            Err(Error::ChartMismatch { .. })
        ));
        assert!(make_space_form(0, Chart::StereographicS3).is_err());
        assert!("poincare".parse::<Chart>().is_err());
        assert_eq!("cylindrical_h3".parse::<Chart>().unwrap(), Chart::CylindricalH3);
    }

    #[test]
    fn closed_forms() {
        let cyl = make_space_form(-1, Chart::CylindricalH3).unwrap();
        let z: f64 = 0.37;
        assert_relative_eq!(cyl.warp(z).f, z.cosh().powi(2), epsilon = 1e-14);
        let (x, y) = (0.5, -0.8);
        let lam = (1.0 - (x * x + y * y) / 4.0_f64).powi(-2);
        assert_relative_eq!(cyl.conformal(x, y).l, lam, epsilon = 1e-14);
        let s3 = make_space_form(1, Chart::StereographicS3).unwrap();
        assert_relative_eq!(s3.warp(z).f, z.cos().powi(2), epsilon = 1e-14);
        let lam = (1.0 + (x * x + y * y) / 4.0_f64).powi(-2);
        assert_relative_eq!(s3.conformal(x, y).l, lam, epsilon = 1e-14);
        let hs = make_space_form(-1, Chart::HalfspaceH3).unwrap();
        assert_relative_eq!(hs.warp(z).f, (-2.0 * z).exp(), epsilon = 1e-14);
        for m in models() {
            assert_eq!(m.warp(0.0).f, 1.0);
            assert_eq!(m.conformal(0.0, 0.0).l, 1.0);
        }
    }

    #[test]
    fn domains() {
        let cyl = make_space_form(-1, Chart::CylindricalH3).unwrap();
        assert!(cyl.in_domain(1.9, 0.0, 5.0));
        assert!(!cyl.in_domain(2.0, 0.0, 0.0));
        let s3 = make_space_form(1, Chart::StereographicS3).unwrap();
        assert!(!s3.in_domain(0.0, 0.0, FRAC_PI_2));
        assert!(s3.in_domain(100.0, 0.0, 1.5));
    }

    fn second_order_fd(f: impl Fn(f64) -> f64, d: f64, x: f64) -> (f64, f64) {
        let fd = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        ((fd(1e-2) - d).abs(), (fd(5e-3) - d).abs())
    }

    #[test]
    fn warp_and_conformal_partials_are_second_order() {
        for m in models() {
            let z = 0.3;
            let w = m.warp(z);
            for (val, der) in [
                (Box::new(|t: f64| m.warp(t).f) as Box<dyn Fn(f64) -> f64>, w.f1),
                (Box::new(|t: f64| m.warp(t).f1), w.f2),
            ] {
                let (e1, e2) = second_order_fd(val, der, z);
                assert!(e1 < 1e-3 && (e2 <= 0.3 * e1 || e2 < 1e-11), "{:?} {e1} {e2}", m.chart());
            }
            let (x, y) = (0.4, -0.7);
            let l = m.conformal(x, y);
            let checks: [(Box<dyn Fn(f64) -> f64>, f64, f64); 5] = [
                (Box::new(|t| m.conformal(t, y).l), l.lx, x),
                (Box::new(|t| m.conformal(x, t).l), l.ly, y),
                (Box::new(|t| m.conformal(t, y).lx), l.lxx, x),
                (Box::new(|t| m.conformal(x, t).lx), l.lxy, y),
                (Box::new(|t| m.conformal(x, t).ly), l.lyy, y),
            ];
            for (f, d, at) in checks {
                let (e1, e2) = second_order_fd(f, d, at);
                assert!(e1 < 1e-3 && (e2 <= 0.3 * e1 || e2 < 1e-11), "{:?} {e1} {e2}", m.chart());
            }
        }
    }

    #[test]
    fn cartesian_coefficients_are_pure() {
        let m = make_space_form(0, Chart::Cartesian).unwrap();
        let k = CurvatureField::parse("2 + x*x + exp(z)").unwrap();
        let s = State::new(0.3, -0.2, 0.1, 0.7, -1.1);
        let co = ma_coefficients(&m, &k, &s).unwrap();
        assert_eq!((co.a, co.b, co.c), (0.0, 0.0, 0.0));
        let kv = k.eval(s.x, s.y, s.z).unwrap();
        assert_relative_eq!(co.e, kv * (1.0 + 0.49 + 1.21f64).powi(2), epsilon = 1e-13);
    }

    #[test]
    fn origin_state_in_every_chart() {
        let k = CurvatureField::parse("exp(z) + 0.5").unwrap();
        for m in models() {
            let co = ma_coefficients(&m, &k, &State::default()).unwrap();
            assert!(co.a.abs() < 1e-15 || m.chart() == Chart::HalfspaceH3);
            if m.chart() != Chart::HalfspaceH3 {
                assert_eq!((co.a, co.b, co.c), (0.0, 0.0, 0.0));
                assert_relative_eq!(co.e, 1.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn halfspace_coefficients() {
        let m = make_space_form(-1, Chart::HalfspaceH3).unwrap();
        let k = CurvatureField::constant(1.0);
        for (p, q) in [(0.3, -0.4), (1.5, 2.0), (0.0, 0.0)] {
            let co = ma_coefficients(&m, &k, &State::new(0.0, 0.0, 0.0, p, q)).unwrap();
            assert_relative_eq!(co.a, 2.0 * q * q + 1.0, epsilon = 1e-14);
            assert_relative_eq!(co.b, -2.0 * p * q, epsilon = 1e-14);
            assert_relative_eq!(co.c, 2.0 * p * p + 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_nonpositive_curvature_and_domain_exit() {
        let m = make_space_form(0, Chart::Cartesian).unwrap();
        let k = CurvatureField::parse("x").unwrap();
        assert!(matches!(
            ma_coefficients(&m, &k, &State::new(-1.0, 0.0, 0.0, 0.0, 0.0)),
            Err(Error::NonpositiveCurvature { .. })
        ));
        let cyl = make_space_form(-1, Chart::CylindricalH3).unwrap();
        assert!(matches!(
            ma_coefficients(&cyl, &CurvatureField::constant(1.0), &State::new(3.0, 0.0, 0.0, 0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn normal_examples() {
        let m = make_space_form(0, Chart::Cartesian).unwrap();
        let (n, nu) = unit_normal_angle(&m, &State::default()).unwrap();
        assert_eq!((n, nu), ([0.0, 0.0, 1.0], 1.0));
        let (_, nu) = unit_normal_angle(&m, &State::new(0.0, 0.0, 0.0, 0.6, 0.8)).unwrap();
        assert_relative_eq!(nu, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let hs = make_space_form(-1, Chart::HalfspaceH3).unwrap();
        for z in [-3.0, 0.0, 2.0] {
            assert_eq!(unit_normal_angle(&hs, &State::new(0.0, 0.0, z, 0.0, 0.0)).unwrap().1, 1.0);
        }
    }

    #[test]
    fn christoffel_matches_metric_derivatives() {
        // Γ_{kij} = ½(∂_i g_jk + ∂_j g_ik − ∂_k g_ij), lowered with the metric.
        for m in models() {
            let pos = [0.3, -0.5, 0.2];
            let g = |p: [f64; 3]| m.metric_factor(p[0], p[1], p[2]).0;
            let h = 1e-5;
            let dg: [f64; 3] = std::array::from_fn(|i| {
                let (mut a, mut b) = (pos, pos);
                a[i] += h;
                b[i] -= h;
                (g(a) - g(b)) / (2.0 * h)
            });
            let metric = |k: usize, l: usize, p: [f64; 3]| -> f64 {
                if k != l {
                    0.0
                } else if k < 2 {
                    g(p)
                } else {
                    1.0
                }
            };
            let dmetric = |k: usize, l: usize, i: usize| -> f64 {
                if k == l && k < 2 {
                    dg[i]
                } else {
                    0.0
                }
            };
            for i in 0..3 {
                for j in 0..3 {
                    let mut ei = [0.0; 3];
                    let mut ej = [0.0; 3];
                    ei[i] = 1.0;
                    ej[j] = 1.0;
                    let gam = m.christoffel(pos, ei, ej);
                    for k in 0..3 {
                        let lowered = metric(k, k, pos) * gam[k];
                        let expect =
                            0.5 * (dmetric(j, k, i) + dmetric(i, k, j) - dmetric(i, j, k));
                        assert!((lowered - expect).abs() < 1e-8, "{:?} {i}{j}{k}", m.chart());
                    }
                }
            }
        }
    }

    #[test]
    fn ambient_maps_fix_the_origin_and_are_conformal_at_it() {
        for m in models() {
            let o = m.to_ambient([0.0, 0.0, 0.0]);
            if m.chart() == Chart::HalfspaceH3 {
                assert_eq!(o, [0.0, 0.0, 1.0]);
            } else {
                assert!(o.iter().all(|c| c.abs() < 1e-15), "{:?}", m.chart());
            }
            let d = m.ambient_direction([0.0, 0.0, 0.0], [1.0, 2.0, 2.0]);
            for (a, b) in d.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
                assert_relative_eq!(*a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn ambient_maps_are_conformal() {
        // Orthogonal chart vectors stay orthogonal in the ambient picture.
        for m in models() {
            let pos = [0.4, -0.3, 0.25];
            let u = [1.0, 0.0, 0.3];
            let v = [0.0, 1.0, 0.0];
            assert!(m.inner(pos, u, v).abs() < 1e-15);
            let (du, dv) = (m.ambient_direction(pos, u), m.ambient_direction(pos, v));
            let dot: f64 = du.iter().zip(&dv).map(|(s, t)| s * t).sum();
            assert!(dot.abs() < 1e-12, "{:?} {dot}", m.chart());
        }
    }

    fn state_strategy() -> impl Strategy<Value = State> {
        (-1.3f64..1.3, -1.3f64..1.3, -1.0f64..1.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(x, y, z, p, q)| State::new(x, y, z, p, q))
    }

    proptest! {
        #[test]
        fn discriminant_identities(s in state_strategy()) {
            let k = CurvatureField::parse("exp(z) * (1 + 0.25 * x^2 + 0.1*sin(y))").unwrap();
            for m in models() {
                let co = ma_coefficients(&m, &k, &s).unwrap();
                prop_assert!(co.d > 0.0);
                let (fl, _) = m.metric_factor(s.x, s.y, s.z);
                let w = fl + s.p * s.p + s.q * s.q;
                let kv = k.eval(s.x, s.y, s.z).unwrap();
                prop_assert!((co.d - kv * w * w).abs() <= 1e-12 * co.d);
                prop_assert!((co.e - (co.d - co.a * co.c + co.b * co.b)).abs() <= 1e-12 * (1.0 + co.e.abs()));
                let (n, nu) = unit_normal_angle(&m, &s).unwrap();
                prop_assert!((nu * nu * w - fl).abs() <= 1e-13 * fl);
                prop_assert!((m.inner([s.x, s.y, s.z], n, n) - 1.0).abs() < 1e-13);
            }
        }

        // Every entry of the partials table against a central difference.
        #[test]
        fn partials_table_matches_differences(s in state_strategy()) {
            let k = CurvatureField::parse("exp(z) + 0.3 * x * y").unwrap();
            let k = if k.eval(s.x, s.y, s.z).unwrap() > 0.1 { k } else { CurvatureField::parse("exp(z)").unwrap() };
            for m in models() {
                let pr = Problem::new(m, k.clone());
                let co = pr.coefficients(&s).unwrap();
                let table = co.table();
                let h = 1e-4;
                for j in 0..5 {
                    let mut a = s.to_array();
                    let mut b = s.to_array();
                    a[j] += h;
                    b[j] -= h;
                    let va = pr.coefficients(&State::from_array(a)).unwrap().values();
                    let vb = pr.coefficients(&State::from_array(b)).unwrap().values();
                    for i in 0..5 {
                        let fd = (va[i] - vb[i]) / (2.0 * h);
                        let an = table[i][j];
                        let scale = an.abs().max(co.values()[i].abs()).max(1.0);
                        prop_assert!((fd - an).abs() <= 1e-6 * scale,
                            "{:?} row {i} col {j}: {an} vs {fd}", m.chart());
                    }
                }
            }
        }
    }
}
