//! Residuals, ellipticity and the conformal structure of the Monge-Ampère
//! equation, plus the elliptic system satisfied by a solution written in
//! conformal coordinates `(u, v)`:
//!
//! ```text
//! p_u =  √𝒟 y_v + B y_u − C x_u      q_u = −√𝒟 x_v + B x_u − A y_u
//! p_v = −√𝒟 y_u + B y_v − C x_v      q_v =  √𝒟 x_u + B x_v − A y_v
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CoefficientSource, Coefficients, Jet2, State, IP, IQ, IX, IY, IZ};
use crate::jet::Real;

/// Relative tolerance for accepting a jet as a solution.
pub const SOLUTION_TOLERANCE: f64 = 1e-6;

/// `A r + 2B s + C t + r t − s² − E`.
pub fn residual(j: &Jet2, co: &Coefficients) -> f64 {
    co.a * j.r + 2.0 * co.b * j.s + co.c * j.t + j.r * j.t - j.s * j.s - co.e
}

/// Finite-difference step used by [`check_star`].
pub const STAR_STEP: f64 = 1e-3;

/// Largest `p`/`q` sensitivity of `A_p`, `A_q + 2B_p`, `C_p + 2B_q`, `C_q`
/// over the samples; zero when the four combinations are gradient-free.
pub fn check_star(source: &impl CoefficientSource, samples: &[State]) -> Result<f64> {
    let combos = |s: &State| -> Result<[f64; 4]> {
        let co = source.coefficients(s)?;
        Ok([
            co.grad_a[IP],
            co.grad_a[IQ] + 2.0 * co.grad_b[IP],
            co.grad_c[IP] + 2.0 * co.grad_b[IQ],
            co.grad_c[IQ],
        ])
    };
    let h = STAR_STEP;
    let mut worst: f64 = 0.0;
    for s in samples {
        for dir in [IP, IQ] {
            let mut a = s.to_array();
            let mut b = s.to_array();
            a[dir] += h;
            b[dir] -= h;
            let (ca, cb) = (combos(&State::from_array(a))?, combos(&State::from_array(b))?);
            for k in 0..4 {
                worst = worst.max(((ca[k] - cb[k]) / (2.0 * h)).abs());
            }
        }
    }
    Ok(worst)
}

/// `ε (r + C) dx² + 2ε (s − B) dx dy + ε (t + A) dy²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalMetric {
    pub eps: f64,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl ConformalMetric {
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }
}

/// Chooses the sign making the metric positive definite. With
/// `check = true` the jet must satisfy the equation within
/// [`SOLUTION_TOLERANCE`]` · (1 + |E|)`.
pub fn conformal_metric(j: &Jet2, co: &Coefficients, check: bool) -> Result<ConformalMetric> {
    if check {
        let res = residual(j, co).abs();
        let tol = SOLUTION_TOLERANCE * (1.0 + co.e.abs());
        if res > tol {
            return Err(Error::NotASolution {
                residual: res,
                tolerance: tol,
            });
        }
    }
    let m = [j.r + co.c, j.s - co.b, j.t + co.a];
    for eps in [1.0, -1.0] {
        let g = ConformalMetric {
            eps,
            g11: eps * m[0],
            g12: eps * m[1],
            g22: eps * m[2],
        };
        if g.g11 > 0.0 && g.det() > 0.0 {
            return Ok(g);
        }
    }
    Err(Error::IndefiniteMetric)
}

/// Whether all metrics share one sign.
pub fn consistent_sign(metrics: &[ConformalMetric]) -> bool {
    metrics.windows(2).all(|w| w[0].eps == w[1].eps)
}

/// Constants making `z + (a/2)x² + (c/2)y²`-type modifications convex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convexifier {
    pub a: f64,
    pub c: f64,
}

/// `a = c = max(|A| + |B|, |C| + |B|) + 1` over the samples `(A, B, C)`,
/// verified afterwards.
pub fn convexifiers(samples: &[[f64; 3]]) -> Result<Convexifier> {
    let m = samples
        .iter()
        .map(|[a, b, c]| (a.abs() + b.abs()).max(c.abs() + b.abs()))
        .fold(0.0, f64::max);
    let conv = Convexifier {
        a: m + 1.0,
        c: m + 1.0,
    };
    for (i, &[a, b, c]) in samples.iter().enumerate() {
        let (ca, aa) = (conv.c - c, conv.a - a);
        if !(ca > 0.0 && aa > 0.0 && ca * aa - b * b > 0.0) {
            return Err(Error::Convexifier(format!("sample {i} ({a}, {b}, {c})")));
        }
    }
    Ok(conv)
}

/// Coefficients `h₁…h₄`, `h̃₁…h̃₄` of the Laplacians of `x` and `y`.
#[derive(Debug, Clone, Copy)]
pub struct HCoefficients<T = f64> {
    pub h: [T; 4],
    pub ht: [T; 4],
}

pub fn h_coefficients<T: Real>(co: &Coefficients<T>, s: [T; 5]) -> Result<HCoefficients<T>> {
    if co.d.value() <= 0.0 {
        return Err(Error::Ellipticity { value: co.d.value() });
    }
    let (p, q) = (s[IP], s[IQ]);
    let (ga, gb, gc, gd) = (&co.grad_a, &co.grad_b, &co.grad_c, &co.grad_d);
    let inv2d = (co.d * 2.0).recip();
    let inv_sd = co.d.sqrt().recip();
    let kx = (gd[IX] + gd[IZ] * p - gd[IP] * co.c + gd[IQ] * co.b) * inv2d;
    let ky = (gd[IY] + gd[IZ] * q + gd[IP] * co.b - gd[IQ] * co.a) * inv2d;
    let h = [
        gb[IQ] - kx,
        -ga[IQ] - gb[IP] - ky,
        ga[IP],
        (ga[IX] + gb[IY] + ga[IZ] * p + gb[IZ] * q - ga[IP] * co.c + (ga[IQ] + gb[IP]) * co.b
            - gb[IQ] * co.a
            - gd[IP] * 0.5)
            * inv_sd,
    ];
    let ht = [
        gc[IQ],
        -gb[IQ] - gc[IP] - kx,
        gb[IP] - ky,
        (gc[IY] + gb[IX] + gc[IZ] * q + gb[IZ] * p - gb[IP] * co.c + (gb[IQ] + gc[IP]) * co.b
            - gc[IQ] * co.a
            - gd[IQ] * 0.5)
            * inv_sd,
    ];
    Ok(HCoefficients { h, ht })
}

fn directional<T: Real>(grad: &[T; 5], d: &[T; 5]) -> T {
    grad[0] * d[0] + grad[1] * d[1] + grad[2] * d[2] + grad[3] * d[3] + grad[4] * d[4]
}

/// Right-hand side `h(𝐳, 𝐳_u, 𝐳_v)` of `Δ𝐳 = h`, ordered `(x, y, z, p, q)`.
pub fn laplacian_rhs<T: Real>(
    s: [T; 5],
    du: [T; 5],
    dv: [T; 5],
    co: &Coefficients<T>,
) -> Result<[T; 5]> {
    let hc = h_coefficients(co, s)?;
    let (xu, yu, xv, yv) = (du[IX], du[IY], dv[IX], dv[IY]);
    let quad = [
        xu * xu + xv * xv,
        xu * yu + xv * yv,
        yu * yu + yv * yv,
        xu * yv - xv * yu,
    ];
    let lap_x = hc.h[0] * quad[0] + hc.h[1] * quad[1] + hc.h[2] * quad[2] + hc.h[3] * quad[3];
    let lap_y = hc.ht[0] * quad[0] + hc.ht[1] * quad[1] + hc.ht[2] * quad[2] + hc.ht[3] * quad[3];

    let inv2sd = (co.d.sqrt() * 2.0).recip();
    let sd_u = directional(&co.grad_d, &du) * inv2sd;
    let sd_v = directional(&co.grad_d, &dv) * inv2sd;
    let (a_u, a_v) = (directional(&co.grad_a, &du), directional(&co.grad_a, &dv));
    let (b_u, b_v) = (directional(&co.grad_b, &du), directional(&co.grad_b, &dv));
    let (c_u, c_v) = (directional(&co.grad_c, &du), directional(&co.grad_c, &dv));

    let lap_p = sd_u * yv - sd_v * yu + b_u * yu + b_v * yv + co.b * lap_y
        - co.c * lap_x
        - c_u * xu
        - c_v * xv;
    let lap_q = -(sd_u * xv) + sd_v * xu + b_u * xu + b_v * xv + co.b * lap_x
        - co.a * lap_y
        - a_u * yu
        - a_v * yv;
    let lap_z = du[IP] * xu + dv[IP] * xv + du[IQ] * yu + dv[IQ] * yv
        + s[IP] * lap_x
        + s[IQ] * lap_y;
    Ok([lap_x, lap_y, lap_z, lap_p, lap_q])
}

/// Defects of the first-order system, in the order `p_u, p_v, q_u, q_v`.
pub fn first_order_residual<T: Real>(du: [T; 5], dv: [T; 5], co: &Coefficients<T>) -> Result<[T; 4]> {
    if co.d.value() <= 0.0 {
        return Err(Error::Ellipticity { value: co.d.value() });
    }
    let sd = co.d.sqrt();
    let (xu, yu, xv, yv) = (du[IX], du[IY], dv[IX], dv[IY]);
    Ok([
        du[IP] - (sd * yv + co.b * yu - co.c * xu),
        dv[IP] - (-(sd * yu) + co.b * yv - co.c * xv),
        du[IQ] - (-(sd * xv) + co.b * xu - co.a * yu),
        dv[IQ] - (sd * xu + co.b * xv - co.a * yv),
    ])
}
