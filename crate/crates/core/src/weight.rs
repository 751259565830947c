//! Smooth compactly supported weights and their Fourier transforms.
//!
//! Every weight is `ψ(t) = S((t − lo)/w_lo) · S((hi − t)/w_hi)` where
//! `S(τ) = f(τ) / (f(τ) + f(1 − τ))`, `f(τ) = exp(−1/τ)` for `τ > 0`, is the
//! standard C∞ step from 0 to 1 on `[0, 1]`. Derivatives up to order 4 are
//! computed exactly with truncated Taylor arithmetic.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{param, Result};
use crate::quadrature::integrate;

/// Highest derivative order tracked.
pub const ORDER: usize = 4;

/// Grid size for the recorded derivative constants.
pub const DERIVATIVE_GRID: usize = 10_000;

/// Quadrature tolerance for one Fourier coefficient (per unit edge width).
pub const FOURIER_TOL: f64 = 1e-12;

/// Truncated Taylor series `Σ_{k ≤ 4} c_k ε^k` of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; ORDER + 1]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut v = [0.0; ORDER + 1];
        v[0] = c;
        Jet(v)
    }

    /// The affine function `x0 + slope·ε`.
    pub fn variable(x0: f64, slope: f64) -> Self {
        let mut v = [0.0; ORDER + 1];
        v[0] = x0;
        v[1] = slope;
        Jet(v)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `j`-th derivative, `j! · c_j`.
    pub fn derivative(&self, j: usize) -> f64 {
        let fact: f64 = (1..=j).map(|i| i as f64).product();
        self.0[j] * fact
    }

    pub fn exp(self) -> Self {
        let a = self.0;
        let mut b = [0.0; ORDER + 1];
        b[0] = a[0].exp();
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|i| i as f64 * a[i] * b[k - i]).sum();
            b[k] = s / k as f64;
        }
        Jet(b)
    }

    pub fn recip(self) -> Self {
        let a = self.0;
        let mut b = [0.0; ORDER + 1];
        b[0] = 1.0 / a[0];
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|i| a[i] * b[k - i]).sum();
            b[k] = -s * b[0];
        }
        Jet(b)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|c| -c))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| {
            (0..=k).map(|i| self.0[i] * o.0[k - i]).sum()
        }))
    }
}

/// The smooth step `S(τ)`.
pub fn smooth_step(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / tau).exp();
        let b = (-1.0 / (1.0 - tau)).exp();
        a / (a + b)
    }
}

fn flat(tau: Jet) -> Jet {
    if tau.value() <= 0.0 {
        Jet::constant(0.0)
    } else {
        (-tau.recip()).exp()
    }
}

fn smooth_step_jet(tau: Jet) -> Jet {
    if tau.value() <= 0.0 {
        Jet::constant(0.0)
    } else if tau.value() >= 1.0 {
        Jet::constant(1.0)
    } else {
        let a = flat(tau);
        let b = flat(Jet::constant(1.0) - tau);
        a * (a + b).recip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// Supported on `[1, 2]`, edges of width `δ/2`.
    Bump,
    /// Supported on `[−N, N]`, equal to 1 on `[−N/2, N/2]`.
    WindowSymmetric,
    /// Supported on `[1/2, N]`, edges of width `(N − 1/2)/4`.
    WindowHalf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub delta: f64,
    pub n: f64,
}

impl WeightSpec {
    pub fn bump(delta: f64) -> Self {
        Self {
            kind: WeightKind::Bump,
            delta,
            n: 1.0,
        }
    }

    pub fn window_symmetric(n: f64) -> Self {
        Self {
            kind: WeightKind::WindowSymmetric,
            delta: 1.0,
            n,
        }
    }

    pub fn window_half(n: f64) -> Self {
        Self {
            kind: WeightKind::WindowHalf,
            delta: 1.0,
            n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    spec: WeightSpec,
    lo: f64,
    hi: f64,
    w_lo: f64,
    w_hi: f64,
}

/// Build the weight described by `spec`.
pub fn make_weight(spec: WeightSpec) -> Result<Weight> {
    if !(spec.delta > 0.0 && spec.delta <= 1.0) {
        return param("delta", format!("{} not in (0, 1]", spec.delta));
    }
    if !(spec.n.is_finite() && spec.n > 0.0) {
        return param("N", format!("{} must be positive", spec.n));
    }
    let (lo, hi, w_lo, w_hi) = match spec.kind {
        WeightKind::Bump => (1.0, 2.0, spec.delta / 2.0, spec.delta / 2.0),
        WeightKind::WindowSymmetric => (-spec.n, spec.n, spec.n / 2.0, spec.n / 2.0),
        WeightKind::WindowHalf => {
            let w = ((spec.n - 0.5) / 4.0).max(0.0);
            (0.5, spec.n.max(0.5), w, w)
        }
    };
    Ok(Weight {
        spec,
        lo,
        hi,
        w_lo,
        w_hi,
    })
}

impl Weight {
    pub fn spec(&self) -> WeightSpec {
        self.spec
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Length scale of the derivative bounds: `δ` for the bump, `N` otherwise.
    pub fn scale(&self) -> f64 {
        match self.spec.kind {
            WeightKind::Bump => self.spec.delta,
            _ => self.spec.n,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.w_lo <= 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.is_zero() || t <= self.lo || t >= self.hi {
            return 0.0;
        }
        smooth_step((t - self.lo) / self.w_lo) * smooth_step((self.hi - t) / self.w_hi)
    }

    /// `ψ^{(j)}(t)` for `j = 0..=4`.
    pub fn derivatives(&self, t: f64) -> [f64; ORDER + 1] {
        if self.is_zero() || t <= self.lo || t >= self.hi {
            return [0.0; ORDER + 1];
        }
        let rise = smooth_step_jet(Jet::variable((t - self.lo) / self.w_lo, 1.0 / self.w_lo));
        let fall = smooth_step_jet(Jet::variable((self.hi - t) / self.w_hi, -1.0 / self.w_hi));
        let j = rise * fall;
        std::array::from_fn(|k| j.derivative(k))
    }

    /// `c_j = max |ψ^{(j)}| · scale^j` over an equispaced grid of the support.
    pub fn derivative_constants(&self, grid: usize) -> [f64; ORDER + 1] {
        let mut c = [0.0f64; ORDER + 1];
        if self.is_zero() {
            return c;
        }
        let step = (self.hi - self.lo) / grid as f64;
        for i in 0..=grid {
            let d = self.derivatives(self.lo + step * i as f64);
            for k in 0..=ORDER {
                c[k] = c[k].max(d[k].abs() * self.scale().powi(k as i32));
            }
        }
        c
    }

    /// `ψ̂(ξ) = ∫ ψ(t) e(−ξt) dt`: closed form on the plateau, adaptive
    /// quadrature over the two edges.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let phase = |t: f64| Complex64::from_polar(1.0, -TAU * (xi * t).rem_euclid(1.0));
        let p0 = self.lo + self.w_lo;
        let p1 = self.hi - self.w_hi;
        let mut total = Complex64::new(0.0, 0.0);
        if p1 > p0 {
            let len = p1 - p0;
            let sinc = if xi == 0.0 {
                len
            } else {
                (PI * xi * len).sin() / (PI * xi)
            };
            total += phase(0.5 * (p0 + p1)) * sinc;
        }
        let edge = |start: f64, w: f64, rising: bool| {
            let panels = (xi.abs() * w).ceil() as usize + 1;
            let v = integrate(
                |tau| {
                    let s = if rising {
                        smooth_step(tau)
                    } else {
                        smooth_step(1.0 - tau)
                    };
                    phase(start + w * tau) * s
                },
                0.0,
                1.0,
                FOURIER_TOL,
                panels,
            );
            v * w
        };
        total += edge(self.lo, self.w_lo, true);
        total += edge(p1.max(self.lo), self.w_hi, false);
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let w = make_weight(WeightSpec::bump(0.25)).unwrap();
        assert_eq!(w.eval(1.0), 0.0);
        let mid = w.eval(1.5);
        assert!(mid > 0.0 && mid <= 1.0);
        for n in [1.0, 3.5, 1000.0] {
            assert_eq!(make_weight(WeightSpec::window_symmetric(n)).unwrap().eval(0.0), 1.0);
        }
        assert!(make_weight(WeightSpec::bump(0.0)).is_err());
        assert!(make_weight(WeightSpec::bump(1.5)).is_err());
    }

    #[test]
    fn range_and_support() {
        for spec in [
            WeightSpec::bump(0.3),
            WeightSpec::window_symmetric(7.0),
            WeightSpec::window_half(12.0),
        ] {
            let w = make_weight(spec).unwrap();
            let (lo, hi) = w.support();
            for i in 0..2000 {
                let t = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 2000.0;
                let v = w.eval(t);
                assert!((0.0..=1.0).contains(&v));
                if t <= lo || t >= hi {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let w = make_weight(WeightSpec::bump(0.5)).unwrap();
        let h = 1e-4;
        for &t in &[1.05, 1.1, 1.2, 1.8, 1.93] {
            let d = w.derivatives(t);
            assert!((d[0] - w.eval(t)).abs() < 1e-15);
            let fd1 = (w.eval(t + h) - w.eval(t - h)) / (2.0 * h);
            assert!((d[1] - fd1).abs() < 1e-5 * (1.0 + d[1].abs()));
            let fd2 = (w.eval(t + h) - 2.0 * w.eval(t) + w.eval(t - h)) / (h * h);
            assert!((d[2] - fd2).abs() < 1e-3 * (1.0 + d[2].abs()));
            let dp = w.derivatives(t + h);
            let dm = w.derivatives(t - h);
            assert!((d[4] - (dp[3] - dm[3]) / (2.0 * h)).abs() < 1e-4 * (1.0 + d[4].abs()));
        }
    }

    #[test]
    fn derivative_constants_scale() {
        let a = make_weight(WeightSpec::bump(0.5)).unwrap().derivative_constants(DERIVATIVE_GRID);
        let b = make_weight(WeightSpec::bump(0.125)).unwrap().derivative_constants(DERIVATIVE_GRID);
        for k in 0..=ORDER {
            assert!(a[k].is_finite() && a[k] > 0.0);
            assert!((a[k] - b[k]).abs() < 0.02 * a[k], "k={k}: {} vs {}", a[k], b[k]);
        }
        let w = make_weight(WeightSpec::window_symmetric(50.0)).unwrap();
        let c = w.derivative_constants(DERIVATIVE_GRID);
        assert!(c[1] < 10.0);
    }

    fn fourier_oracle(w: &Weight, xi: f64) -> Complex64 {
        // plain trapezoid on a very fine grid; the integrand is smooth and
        // vanishes to all orders at the ends
        let (lo, hi) = w.support();
        let n = 200_000;
        let step = (hi - lo) / n as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 1..n {
            let t = lo + step * i as f64;
            s += Complex64::from_polar(w.eval(t), -TAU * xi * t);
        }
        s * step
    }

    #[test]
    fn fourier_matches_trapezoid() {
        for spec in [
            WeightSpec::bump(0.4),
            WeightSpec::window_symmetric(5.0),
            WeightSpec::window_half(9.0),
        ] {
            let w = make_weight(spec).unwrap();
            for &xi in &[0.0, 0.013, 0.37, 1.9, -2.6] {
                let got = w.fourier(xi);
                let want = fourier_oracle(&w, xi);
                assert!((got - want).norm() < 1e-8, "{spec:?} ξ={xi}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn symmetric_window_transform_is_real_and_even() {
        let w = make_weight(WeightSpec::window_symmetric(20.0)).unwrap();
        for &xi in &[0.01, 0.2, 1.3] {
            let a = w.fourier(xi);
            let b = w.fourier(-xi);
            assert!(a.im.abs() < 1e-10);
            assert!((a - b).norm() < 1e-10);
        }
        // plateau of length N plus two edges averaging 1/2
        assert!((w.fourier(0.0).re - 30.0).abs() < 1e-10);
    }
}
