//! Real trigonometric series on the circle and FFT transforms between
//! coefficient space and uniform grids.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::jet::Jet;

/// `f(u) = Σ_{m=0}^{M} a_m cos(m u) + b_m sin(m u)`, with `b_0 = 0`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl fmt::Debug for TrigSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrigSeries")
            .field("order", &self.order())
            .field("cos", &self.cos)
            .field("sin", &self.sin)
            .finish()
    }
}

impl TrigSeries {
    pub fn zeros(order: usize) -> Self {
        TrigSeries {
            cos: vec![0.0; order + 1],
            sin: vec![0.0; order + 1],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut s = TrigSeries::zeros(0);
        s.cos[0] = c;
        s
    }

    /// Builds a series from cosine and sine coefficient lists; the shorter
    /// list is zero-padded and `sin[0]` is ignored.
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len()).max(1);
        let mut s = TrigSeries::zeros(n - 1);
        s.cos[..cos.len()].copy_from_slice(&cos);
        s.sin[..sin.len()].copy_from_slice(&sin);
        s.sin[0] = 0.0;
        s
    }

    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn cos_coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.cos
    }

    pub fn sin_coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.sin
    }

    /// Zero-pads or truncates to `order`.
    pub fn resized(&self, order: usize) -> Self {
        let mut s = TrigSeries::zeros(order);
        let n = order.min(self.order()) + 1;
        s.cos[..n].copy_from_slice(&self.cos[..n]);
        s.sin[..n].copy_from_slice(&self.sin[..n]);
        s
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = self.cos[0];
        for m in 1..=self.order() {
            let (s, c) = (m as f64 * u).sin_cos();
            acc += self.cos[m] * c + self.sin[m] * s;
        }
        acc
    }

    /// Taylor jet of `t ↦ f(u + t)` with `len` coefficients.
    pub fn eval_jet(&self, u: f64, len: usize) -> Jet {
        let mut j = Jet::zeros(len);
        let out = j.coeffs_mut();
        for m in 0..=self.order() {
            let (a, b) = (self.cos[m], self.sin[m]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let mf = m as f64;
            let mut scale = 1.0;
            for (k, o) in out.iter_mut().enumerate() {
                if k > 0 {
                    scale *= mf / k as f64;
                }
                let phase = mf * u + k as f64 * FRAC_PI_2;
                *o += scale * (a * phase.cos() + b * phase.sin());
            }
        }
        j
    }

    pub fn derivative(&self) -> Self {
        let mut d = TrigSeries::zeros(self.order());
        for m in 1..=self.order() {
            let mf = m as f64;
            d.cos[m] = mf * self.sin[m];
            d.sin[m] = -mf * self.cos[m];
        }
        d
    }

    /// Coefficients of `u ↦ f(u + delta)`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut s = self.clone();
        for m in 1..=self.order() {
            let (sn, cs) = (m as f64 * delta).sin_cos();
            let (a, b) = (self.cos[m], self.sin[m]);
            s.cos[m] = a * cs + b * sn;
            s.sin[m] = b * cs - a * sn;
        }
        s
    }

    /// Coefficients of `u ↦ f(-u)`.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        for b in s.sin.iter_mut() {
            *b = -*b;
        }
        s
    }

    pub fn scaled(&self, k: f64) -> Self {
        TrigSeries {
            cos: self.cos.iter().map(|a| a * k).collect(),
            sin: self.sin.iter().map(|b| b * k).collect(),
        }
    }

    pub fn add(&self, other: &TrigSeries) -> Self {
        let order = self.order().max(other.order());
        let mut s = self.resized(order);
        for m in 0..=other.order() {
            s.cos[m] += other.cos[m];
            s.sin[m] += other.sin[m];
        }
        s
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.cos
            .iter()
            .chain(self.sin.iter())
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient-wise difference (orders may differ).
    pub fn max_coeff_diff(&self, other: &TrigSeries) -> f64 {
        let order = self.order().max(other.order());
        let a = self.resized(order);
        let b = other.resized(order);
        a.cos
            .iter()
            .zip(&b.cos)
            .chain(a.sin.iter().zip(&b.sin))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Multiplies mode `m` by `weight(m)`.
    pub fn filter(&mut self, weight: impl Fn(usize) -> f64) {
        for m in 0..=self.order() {
            let w = weight(m);
            self.cos[m] *= w;
            self.sin[m] *= w;
        }
    }

    /// Samples at `u_j = 2πj/n` by direct summation.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }
}

/// Reusable FFT plans for one uniform grid size.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid").field("n", &self.n).finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut planner = FftPlanner::new();
        SpectralGrid {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| TAU * j as f64 / self.n as f64)
            .collect()
    }

    /// Values at the grid nodes. Modes at or above the Nyquist index are
    /// dropped.
    pub fn to_grid(&self, s: &TrigSeries) -> Vec<f64> {
        self.to_grid_checked(s).0
    }

    /// Like [`Self::to_grid`], also returning the largest imaginary part of the
    /// synthesized values (zero up to roundoff for a Hermitian spectrum).
    pub fn to_grid_checked(&self, s: &TrigSeries) -> (Vec<f64>, f64) {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = Complex64::new(s.cos[0], 0.0);
        let top = s.order().min((n - 1) / 2);
        for m in 1..=top {
            let c = Complex64::new(0.5 * s.cos[m], -0.5 * s.sin[m]);
            buf[m] = c;
            buf[n - m] = c.conj();
        }
        self.inverse.process(&mut buf);
        let imag = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (buf.into_iter().map(|z| z.re).collect(), imag)
    }

    /// Least-squares (interpolating when `n = 2 order + 1`) trig fit of grid
    /// values, truncated to `order`.
    pub fn from_grid(&self, values: &[f64], order: usize) -> TrigSeries {
        assert_eq!(values.len(), self.n);
        assert!(
            2 * order < self.n,
            "order {order} not resolvable on {} points",
            self.n
        );
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        let mut s = TrigSeries::zeros(order);
        s.cos[0] = buf[0].re * inv_n;
        for m in 1..=order {
            s.cos[m] = 2.0 * buf[m].re * inv_n;
            s.sin[m] = -2.0 * buf[m].im * inv_n;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn derivative_of_cos_is_minus_sin() {
        let s = TrigSeries::new(vec![0.0, 0.0, 3.0], vec![]);
        let d = s.derivative();
        assert_relative_eq!(d.eval(0.3), -6.0 * (0.6f64).sin(), epsilon = 1e-14);
    }

    #[test]
    fn jet_matches_derivatives() {
        let s = TrigSeries::new(vec![0.2, 1.0, -0.3], vec![0.0, 0.5, 0.25]);
        let j = s.eval_jet(0.7, 4);
        let d1 = s.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        assert_relative_eq!(j.coeff(0), s.eval(0.7), epsilon = 1e-14);
        assert_relative_eq!(j.coeff(1), d1.eval(0.7), epsilon = 1e-14);
        assert_relative_eq!(j.coeff(2), d2.eval(0.7) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(j.coeff(3), d3.eval(0.7) / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn shift_and_reverse() {
        let s = TrigSeries::new(vec![0.1, 0.4, 0.2], vec![0.0, -0.3, 0.7]);
        let t = s.shifted(0.9);
        let r = s.reversed();
        for u in [0.0, 1.1, 4.0] {
            assert_relative_eq!(t.eval(u), s.eval(u + 0.9), epsilon = 1e-14);
            assert_relative_eq!(r.eval(u), s.eval(-u), epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_synthesis_is_real() {
        let s = TrigSeries::new(vec![0.5, 1.0, 0.0, 0.25], vec![0.0, 0.2, -0.4, 0.1]);
        let g = SpectralGrid::new(32);
        let (vals, imag) = g.to_grid_checked(&s);
        assert!(imag < 1e-12);
        for (j, v) in vals.iter().enumerate() {
            assert_relative_eq!(*v, s.eval(TAU * j as f64 / 32.0), epsilon = 1e-13);
        }
    }

    proptest! {
        // Band-limited series survive synthesis followed by a re-fit.
        #[test]
        fn synthesis_refit_identity(
            cos in proptest::collection::vec(-2.0f64..2.0, 1..12),
            sin in proptest::collection::vec(-2.0f64..2.0, 1..12),
        ) {
            let s = TrigSeries::new(cos, sin);
            let g = SpectralGrid::new(4 * (s.order() + 1));
            let back = g.from_grid(&g.to_grid(&s), s.order());
            prop_assert!(back.max_coeff_diff(&s) <= 1e-12);
        }
    }
}
