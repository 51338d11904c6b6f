//! Periodic analytic plane curves (limit gradients) and their lifts to the
//! unit sphere (limit normals).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{SpectralGrid, TrigSeries};
use crate::jet::{Jet, Real};

/// Dense sample count for regularity and convexity checks.
pub const DENSE_SAMPLES: usize = 4096;
/// Sample count of the redundant self-intersection scan.
pub const SCAN_SAMPLES: usize = 1024;
/// `min |γ'| ≥ REGULARITY_RATIO · max |γ'|`.
pub const REGULARITY_RATIO: f64 = 1e-6;
/// `min |κ| ≥ CONVEXITY_RATIO · max |κ|`.
pub const CONVEXITY_RATIO: f64 = 1e-8;

/// `γ(u) = (α(u), β(u))`, 2π-periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCurve {
    pub alpha: TrigSeries,
    pub beta: TrigSeries,
}

impl PeriodicCurve {
    pub fn new(alpha: TrigSeries, beta: TrigSeries) -> Self {
        PeriodicCurve { alpha, beta }
    }

    /// Circle of radius `rho` about the origin, starting at `(rho, 0)`.
    pub fn circle(rho: f64, clockwise: bool) -> Self {
        let s = if clockwise { -rho } else { rho };
        PeriodicCurve::new(
            TrigSeries::new(vec![0.0, rho], vec![]),
            TrigSeries::new(vec![], vec![0.0, s]),
        )
    }

    pub fn order(&self) -> usize {
        self.alpha.order().max(self.beta.order())
    }

    pub fn point(&self, u: f64) -> [f64; 2] {
        [self.alpha.eval(u), self.beta.eval(u)]
    }

    /// Taylor jets of `α(u + t)` and `β(u + t)`.
    pub fn jets(&self, u: f64, len: usize) -> [Jet; 2] {
        [self.alpha.eval_jet(u, len), self.beta.eval_jet(u, len)]
    }

    pub fn derivative(&self) -> Self {
        PeriodicCurve::new(self.alpha.derivative(), self.beta.derivative())
    }

    /// `u ↦ γ(−u)`.
    pub fn reversed(&self) -> Self {
        PeriodicCurve::new(self.alpha.reversed(), self.beta.reversed())
    }

    /// `u ↦ γ(u + delta)`.
    pub fn shifted(&self, delta: f64) -> Self {
        PeriodicCurve::new(self.alpha.shifted(delta), self.beta.shifted(delta))
    }

    pub fn resized(&self, order: usize) -> Self {
        PeriodicCurve::new(self.alpha.resized(order), self.beta.resized(order))
    }

    pub fn max_coeff_diff(&self, other: &PeriodicCurve) -> f64 {
        self.alpha
            .max_coeff_diff(&other.alpha)
            .max(self.beta.max_coeff_diff(&other.beta))
    }

    /// Points at the cell midpoints `u_j = 2π(j + ½)/n`.
    pub fn sample(&self, n: usize) -> Vec<[f64; 2]> {
        midpoints(n).map(|u| self.point(u)).collect()
    }

    /// Min and max of `|γ'|` over `n` midpoint samples.
    pub fn speed_range(&self, n: usize) -> (f64, f64) {
        let d = self.derivative();
        midpoints(n)
            .map(|u| {
                let [a, b] = d.point(u);
                a.hypot(b)
            })
            .fold((f64::INFINITY, 0.0), |(lo, hi), s| (lo.min(s), hi.max(s)))
    }

    pub fn check_regular(&self) -> Result<()> {
        let (lo, hi) = self.speed_range(DENSE_SAMPLES);
        let threshold = REGULARITY_RATIO * hi;
        if hi == 0.0 || lo < threshold {
            return Err(Error::Irregular {
                min_speed: lo,
                threshold,
            });
        }
        Ok(())
    }

    fn curvature_unchecked(&self, u: f64) -> (f64, f64) {
        let [a, b] = self.jets(u, 3);
        let (a1, a2) = (a.coeff(1), 2.0 * a.coeff(2));
        let (b1, b2) = (b.coeff(1), 2.0 * b.coeff(2));
        let speed = a1.hypot(b1);
        ((a1 * b2 - b1 * a2) / speed.powi(3), speed)
    }
}

fn midpoints(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * (j as f64 + 0.5) / n as f64)
}

/// Signed curvature `(α'β'' − β'α'')/|γ'|³`.
pub fn plane_curvature(curve: &PeriodicCurve, u: f64) -> Result<f64> {
    let (_, hi) = curve.speed_range(256);
    let (k, speed) = curve.curvature_unchecked(u);
    if speed < REGULARITY_RATIO * hi || speed == 0.0 {
        return Err(Error::Irregular {
            min_speed: speed,
            threshold: REGULARITY_RATIO * hi,
        });
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    StrictlyConvexPositive,
    StrictlyConvexNegative,
    NotStrictlyConvex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub verdict: Convexity,
    pub min_curvature: f64,
    pub max_curvature: f64,
    /// Total turning of the tangent, in radians.
    pub turning: f64,
    /// Whether the polygon scan found a crossing.
    pub self_intersecting: bool,
}

pub fn convexity_check(curve: &PeriodicCurve) -> Result<Convexity> {
    Ok(convexity_report(curve)?.verdict)
}

pub fn convexity_report(curve: &PeriodicCurve) -> Result<ConvexityReport> {
    curve.check_regular()?;
    let n = DENSE_SAMPLES;
    let mut kmin = f64::INFINITY;
    let mut kmax = f64::NEG_INFINITY;
    let mut kabs_max: f64 = 0.0;
    let mut turning = 0.0;
    let d = curve.derivative();
    let mut prev: Option<f64> = None;
    let mut first = 0.0;
    for u in midpoints(n) {
        let (k, _) = curve.curvature_unchecked(u);
        kmin = kmin.min(k);
        kmax = kmax.max(k);
        kabs_max = kabs_max.max(k.abs());
        let [a, b] = d.point(u);
        let ang = b.atan2(a);
        match prev {
            Some(p) => turning += wrap(ang - p),
            None => first = ang,
        }
        prev = Some(ang);
    }
    turning += wrap(first - prev.unwrap_or(first));
    let tol = CONVEXITY_RATIO * kabs_max;
    let self_intersecting = polygon_self_intersects(&curve.sample(SCAN_SAMPLES));
    let full_turn = (turning.abs() - TAU).abs() < 1e-6;
    let verdict = if !full_turn || self_intersecting {
        Convexity::NotStrictlyConvex
    } else if kmin > tol {
        Convexity::StrictlyConvexPositive
    } else if kmax < -tol {
        Convexity::StrictlyConvexNegative
    } else {
        Convexity::NotStrictlyConvex
    };
    Ok(ConvexityReport {
        verdict,
        min_curvature: kmin,
        max_curvature: kmax,
        turning,
        self_intersecting,
    })
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Closed polygon self-intersection scan over non-adjacent edges.
pub fn polygon_self_intersects(pts: &[[f64; 2]]) -> bool {
    let n = pts.len();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let (d1, d2) = (cross(a, b, c), cross(a, b, d));
            let (d3, d4) = (cross(c, d, a), cross(c, d, b));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}

/// Returns the curve traversed with negative curvature.
pub fn orient_for_construction(curve: &PeriodicCurve) -> Result<PeriodicCurve> {
    match convexity_check(curve)? {
        Convexity::StrictlyConvexNegative => Ok(curve.clone()),
        Convexity::StrictlyConvexPositive => Ok(curve.reversed()),
        Convexity::NotStrictlyConvex => Err(Error::NotStrictlyConvex),
    }
}

/// An orthonormal basis `{e₁, e₂, e₃}` of ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub e: [[f64; 3]; 3],
}

impl Default for Frame {
    fn default() -> Self {
        Frame {
            e: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }
}

impl Frame {
    pub fn new(e: [[f64; 3]; 3]) -> Result<Self> {
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g: f64 = (0..3).map(|k| e[i][k] * e[j][k]).sum();
                dev = dev.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        if dev > 1e-10 {
            return Err(Error::FrameNotOrthonormal(dev));
        }
        Ok(Frame { e })
    }

    /// Rotation about `axis` (normalized internally) by `angle`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Frame {
            e: [
                [t * x * x + c, t * x * y + s * z, t * x * z - s * y],
                [t * x * y - s * z, t * y * y + c, t * y * z + s * x],
                [t * x * z + s * y, t * y * z - s * x, t * z * z + c],
            ],
        }
    }

    fn combine<T: Real>(&self, c: [T; 3]) -> [T; 3] {
        std::array::from_fn(|k| c[0] * self.e[0][k] + c[1] * self.e[1][k] + c[2] * self.e[2][k])
    }

    fn coords(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|k| v[k] * self.e[i][k]).sum())
    }
}

/// `σ(u) = (−α e₁ − β e₂ + e₃)/√(1 + α² + β²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalCurve {
    pub base: PeriodicCurve,
    pub frame: Frame,
}

pub fn spherical_lift(curve: &PeriodicCurve, frame: &Frame) -> Result<SphericalCurve> {
    Frame::new(frame.e)?;
    Ok(SphericalCurve {
        base: curve.clone(),
        frame: *frame,
    })
}

fn lift<T: Real>(a: T, b: T, frame: &Frame) -> [T; 3] {
    let inv = (a * a + b * b + 1.0).sqrt().recip();
    frame.combine([-(a * inv), -(b * inv), inv])
}

/// Recovers the plane point from a unit vector with positive `e₃` component.
pub fn inverse_projection(sigma: [f64; 3], frame: &Frame) -> [f64; 2] {
    let s = frame.coords(sigma);
    [-s[0] / s[2], -s[1] / s[2]]
}

impl SphericalCurve {
    pub fn point(&self, u: f64) -> [f64; 3] {
        let [a, b] = self.base.point(u);
        lift(a, b, &self.frame)
    }

    /// `σ`, `σ'`, `σ''` at `u`.
    pub fn derivatives(&self, u: f64) -> [[f64; 3]; 3] {
        let [a, b] = self.base.jets(u, 3);
        let s = lift(a, b, &self.frame);
        std::array::from_fn(|k| {
            let f = if k == 2 { 2.0 } else { 1.0 };
            std::array::from_fn(|i| f * s[i].coeff(k))
        })
    }

    /// `⟨σ'', σ × σ'⟩ / |σ'|³`.
    pub fn geodesic_curvature(&self, u: f64) -> f64 {
        let [s, s1, s2] = self.derivatives(u);
        let c = cross(s, s1);
        let speed = norm(s1);
        dot(s2, c) / speed.powi(3)
    }

    /// Re-fits the plane curve from samples of `σ` at the given order.
    pub fn project_back(&self, order: usize) -> PeriodicCurve {
        let n = 4 * (order + 1);
        let grid = SpectralGrid::new(n);
        let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for u in grid.nodes() {
            let [x, y] = inverse_projection(self.point(u), &self.frame);
            a.push(x);
            b.push(y);
        }
        PeriodicCurve::new(grid.from_grid(&a, order), grid.from_grid(&b, order))
    }

    /// Min and max of `|σ'|` and of the geodesic curvature over `n` samples.
    pub fn sample_report(&self, n: usize) -> SphericalReport {
        let mut r = SphericalReport {
            min_speed: f64::INFINITY,
            max_speed: 0.0,
            min_geodesic_curvature: f64::INFINITY,
            max_geodesic_curvature: f64::NEG_INFINITY,
            max_norm_deviation: 0.0,
        };
        for u in midpoints(n) {
            let [s, s1, _] = self.derivatives(u);
            let sp = norm(s1);
            let kg = self.geodesic_curvature(u);
            r.min_speed = r.min_speed.min(sp);
            r.max_speed = r.max_speed.max(sp);
            r.min_geodesic_curvature = r.min_geodesic_curvature.min(kg);
            r.max_geodesic_curvature = r.max_geodesic_curvature.max(kg);
            r.max_norm_deviation = r.max_norm_deviation.max((norm(s) - 1.0).abs());
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalReport {
    pub min_speed: f64,
    pub max_speed: f64,
    pub min_geodesic_curvature: f64,
    pub max_geodesic_curvature: f64,
    pub max_norm_deviation: f64,
}

impl SphericalReport {
    pub fn regular(&self) -> bool {
        self.min_speed >= REGULARITY_RATIO * self.max_speed && self.max_speed > 0.0
    }

    /// Geodesic curvature keeps one sign, bounded away from zero.
    pub fn strictly_convex(&self) -> bool {
        let scale = self
            .min_geodesic_curvature
            .abs()
            .max(self.max_geodesic_curvature.abs());
        let tol = CONVEXITY_RATIO * scale;
        self.min_geodesic_curvature > tol || self.max_geodesic_curvature < -tol
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
