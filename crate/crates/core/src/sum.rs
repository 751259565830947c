//! Compensated (Neumaier) accumulators.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexNeumaier {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Sum in iteration order with compensation.
pub fn csum<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    it.into_iter().collect::<ComplexNeumaier>().value()
}

pub fn fsum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().collect::<Neumaier>().value()
}

/// `e(k/q) = exp(2πi k/q)` for an integer residue `k`.
#[inline]
pub fn e_q(k: u64, q: u64) -> Complex64 {
    let k = k % q;
    // symmetric representative keeps the angle in [-π, π]
    let t = if 2 * k > q {
        -((q - k) as f64) / q as f64
    } else {
        k as f64 / q as f64
    };
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Table of `e(k/q)` for `k ∈ [0, q)`, identical entry-by-entry to [`e_q`].
pub fn twiddles(q: u64) -> Vec<Complex64> {
    (0..q).map(|k| e_q(k, q)).collect()
}
