//! Truncated power series ("jets") in one variable, plus the [`Real`] trait
//! that lets the geometry and Monge-Ampère code run unchanged on plain `f64`
//! values and on Taylor coefficients.
//!
//! A [`Jet`] stores the coefficients `a_0 + a_1 t + ... + a_{n-1} t^{n-1}`.
//! Arithmetic truncates at the length of the longest operand; shorter
//! operands are treated as exact (zero-padded), which is correct for
//! constants and for jets that all share one working length.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Maximum number of stored Taylor coefficients.
pub const JET_CAP: usize = 64;

/// Scalar interface shared by `f64` and [`Jet`].
pub trait Real:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(c: f64) -> Self;
    /// Leading (point) value.
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Real power; requires a positive leading value unless `e` is an integer.
    fn powf(self, e: f64) -> Self;

    fn square(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// Truncated Taylor series with inline storage.
#[derive(Clone, Copy)]
pub struct Jet {
    c: [f64; JET_CAP],
    len: usize,
}

impl Jet {
    /// Exact constant (length one).
    pub fn constant(c: f64) -> Self {
        let mut j = Jet::zeros(1);
        j.c[0] = c;
        j
    }

    /// `x0 + t`, truncated to `len` coefficients.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut j = Jet::zeros(len);
        j.c[0] = x0;
        if len > 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=JET_CAP).contains(&len),
            "jet length {len} outside 1..={JET_CAP}"
        );
        Jet {
            c: [0.0; JET_CAP],
            len,
        }
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let mut j = Jet::zeros(coeffs.len().max(1));
        j.c[..coeffs.len()].copy_from_slice(coeffs);
        j
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.c[..self.len]
    }

    /// Coefficient `k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    /// d/dt; the result is one coefficient shorter (minimum length one).
    pub fn derivative(&self) -> Jet {
        let mut d = Jet::zeros((self.len - 1).max(1));
        for k in 1..self.len {
            d.c[k - 1] = k as f64 * self.c[k];
        }
        d
    }

    pub fn truncate(&self, len: usize) -> Jet {
        let mut j = Jet::zeros(len.clamp(1, JET_CAP));
        let n = j.len.min(self.len);
        j.c[..n].copy_from_slice(&self.c[..n]);
        j
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    fn sin_cos(self) -> (Jet, Jet) {
        let n = self.len;
        let mut s = Jet::zeros(n);
        let mut c = Jet::zeros(n);
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                ss += ja * c.c[k - j];
                cc += ja * s.c[k - j];
            }
            s.c[k] = ss / k as f64;
            c.c[k] = -cc / k as f64;
        }
        (s, c)
    }

    fn sinh_cosh(self) -> (Jet, Jet) {
        let n = self.len;
        let mut s = Jet::zeros(n);
        let mut c = Jet::zeros(n);
        s.c[0] = self.c[0].sinh();
        c.c[0] = self.c[0].cosh();
        for k in 1..n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                ss += ja * c.c[k - j];
                cc += ja * s.c[k - j];
            }
            s.c[k] = ss / k as f64;
            c.c[k] = cc / k as f64;
        }
        (s, c)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Jet").field(&self.coeffs()).finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        let n = self.len.max(other.len);
        (0..n).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut out = if self.len >= rhs.len { self } else { rhs };
        let other = if self.len >= rhs.len { &rhs } else { &self };
        for k in 0..other.len {
            out.c[k] += other.c[k];
        }
        out
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.coeffs_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        if rhs.len == 1 {
            return self * rhs.c[0];
        }
        if self.len == 1 {
            return rhs * self.c[0];
        }
        let n = self.len.max(rhs.len);
        let mut out = Jet::zeros(n);
        for k in 0..n {
            let lo = k.saturating_sub(rhs.len - 1);
            let hi = k.min(self.len - 1);
            let mut acc = 0.0;
            for i in lo..=hi {
                acc += self.c[i] * rhs.c[k - i];
            }
            out.c[k] = acc;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.len == 1 {
            return self / rhs.c[0];
        }
        let n = self.len.max(rhs.len);
        let mut q = Jet::zeros(n);
        let b0 = rhs.c[0];
        for k in 0..n {
            let mut acc = self.coeff(k);
            for i in 1..=k.min(rhs.len - 1) {
                acc -= rhs.c[i] * q.c[k - i];
            }
            q.c[k] = acc / b0;
        }
        q
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for a in self.coeffs_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, rhs: f64) -> Jet {
        for a in self.coeffs_mut() {
            *a /= rhs;
        }
        self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Real for Jet {
    fn from_f64(c: f64) -> Self {
        Jet::constant(c)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn exp(self) -> Self {
        let n = self.len;
        let mut e = Jet::zeros(n);
        e.c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e.c[k - j];
            }
            e.c[k] = acc / k as f64;
        }
        e
    }

    fn ln(self) -> Self {
        let n = self.len;
        let a0 = self.c[0];
        let mut l = Jet::zeros(n);
        l.c[0] = a0.ln();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * l.c[j] * self.c[k - j];
            }
            l.c[k] = (self.c[k] - acc / k as f64) / a0;
        }
        l
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sinh(self) -> Self {
        self.sinh_cosh().0
    }

    fn cosh(self) -> Self {
        self.sinh_cosh().1
    }

    fn sqrt(self) -> Self {
        let n = self.len;
        let mut s = Jet::zeros(n);
        s.c[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += s.c[j] * s.c[k - j];
            }
            s.c[k] = (self.c[k] - acc) / (2.0 * s.c[0]);
        }
        s
    }

    fn recip(self) -> Self {
        Jet::constant(1.0) / self
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self;
        let mut acc = Jet::constant(1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if acc.len < self.len {
            acc = acc.truncate(self.len);
        }
        acc
    }

    fn powf(self, e: f64) -> Self {
        if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
            return self.powi(e as i32);
        }
        let n = self.len;
        let a0 = self.c[0];
        let mut p = Jet::zeros(n);
        p.c[0] = a0.powf(e);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((e + 1.0) * j as f64 - k as f64) * self.c[j] * p.c[k - j];
            }
            p.c[k] = acc / (k as f64 * a0);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn known_series() {
        let t = Jet::variable(0.0, 6);
        let e = t.exp();
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        for k in 0..6 {
            assert_relative_eq!(e.coeff(k), 1.0 / fact[k], epsilon = 1e-15);
        }
        let s = t.sin();
        assert_relative_eq!(s.coeff(3), -1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(5), 1.0 / 120.0, epsilon = 1e-15);
        let c = t.cosh();
        assert_relative_eq!(c.coeff(4), 1.0 / 24.0, epsilon = 1e-15);
        let g = (Jet::constant(1.0) - t).recip();
        for k in 0..6 {
            assert_relative_eq!(g.coeff(k), 1.0, epsilon = 1e-15);
        }
        let l = (t + 1.0).ln();
        assert_relative_eq!(l.coeff(4), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Jet::from_coeffs(&[2.0, 0.3, -0.7, 0.1, 0.05]);
        let r = x.sqrt();
        let back = r * r;
        for k in 0..5 {
            assert_relative_eq!(back.coeff(k), x.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn powf_matches_exp_ln() {
        let x = Jet::from_coeffs(&[1.7, 0.4, -0.2, 0.3]);
        let a = x.powf(-2.5);
        let b = (x.ln() * -2.5).exp();
        for k in 0..4 {
            assert_relative_eq!(a.coeff(k), b.coeff(k), epsilon = 1e-13);
        }
        let i = x.powi(3);
        let m = x * x * x;
        for k in 0..4 {
            assert_relative_eq!(i.coeff(k), m.coeff(k), epsilon = 1e-13);
        }
    }

    #[test]
    fn constants_mix_with_full_jets() {
        let t = Jet::variable(0.5, 4);
        let y = Jet::constant(3.0) * t + Jet::constant(1.0);
        assert_eq!(y.len(), 4);
        assert_eq!(y.coeffs(), &[2.5, 3.0, 0.0, 0.0]);
        assert_eq!(t.derivative().coeffs(), &[1.0, 0.0, 0.0]);
    }

    fn composite<T: Real>(x: T) -> T {
        (x.sin() * x.cosh() + x.square().exp()).sqrt() / (x * 0.5 + 2.0) + x.powi(3).ln()
    }

    proptest! {
        // The first two coefficients of a composite expression must agree with
        // central finite differences of the f64 evaluation.
        #[test]
        fn composite_derivatives_match_finite_differences(x0 in 0.3f64..1.5) {
            let j = composite(Jet::variable(x0, 3));
            let h = 1e-4;
            let f = |x: f64| composite(x);
            let d1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
            let d2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
            prop_assert!((j.coeff(0) - f(x0)).abs() < 1e-13);
            prop_assert!((j.coeff(1) - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            prop_assert!((2.0 * j.coeff(2) - d2).abs() < 1e-4 * (1.0 + d2.abs()));
        }
    }
}
