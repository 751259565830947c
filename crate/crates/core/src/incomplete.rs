//! Incomplete sums of Kloosterman sums: Poisson completion, the shifted
//! correlation sums behind the q-analogue of van der Corput, and bilinear
//! forms with divisor-bounded coefficients.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{divisor_count, gcd, is_cubefree, is_squarefree, mul_mod, reduce};
use crate::bounds::{bound_k, lambda_norm_sum, poisson_rhs, qvdc_rhs, KBound};
use crate::complete::twisted_sums_all;
use crate::error::{param, Error, Result};
use crate::kloosterman::{eval_many, kl2_batch, KlPlan, KlTable};
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::weight::{make_weight, Weight, WeightSpec};

/// `q = r·s·u` with a residue `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModulusSplit {
    pub r: u64,
    pub s: u64,
    pub u: u64,
    pub a: i64,
}

impl ModulusSplit {
    pub fn new(r: u64, s: u64, u: u64, a: i64) -> Result<Self> {
        let m = Self { r, s, u, a };
        m.validate(true)?;
        Ok(m)
    }

    pub fn modulus(&self) -> u64 {
        self.r * self.s * self.u
    }

    /// Pairwise coprimality of `r, s, u`, cube-free `s`, and optionally
    /// `gcd(a, rsu) = 1`.
    pub fn validate(&self, unit_a: bool) -> Result<()> {
        for (name, v) in [("r", self.r), ("s", self.s), ("u", self.u)] {
            if v == 0 {
                return Err(Error::Zero(name));
            }
        }
        for (x, y) in [(self.r, self.s), (self.r, self.u), (self.s, self.u)] {
            if gcd(x, y) != 1 {
                return Err(Error::NotCoprime(x, y));
            }
        }
        if !is_cubefree(self.s) {
            return Err(Error::NotCubeFree(self.s));
        }
        if unit_a && gcd(self.a.unsigned_abs(), self.modulus()) != 1 {
            return Err(Error::NotCoprime(self.a.unsigned_abs(), self.modulus()));
        }
        Ok(())
    }
}

fn require_coprime(values: &[(u64, u64)]) -> Result<()> {
    for &(x, y) in values {
        if gcd(x, y) != 1 {
            return Err(Error::NotCoprime(x, y));
        }
    }
    Ok(())
}

fn require_cubefree(values: &[u64]) -> Result<()> {
    for &v in values {
        if v == 0 {
            return Err(Error::Zero("modulus factor"));
        }
        if !is_cubefree(v) {
            return Err(Error::NotCubeFree(v));
        }
    }
    Ok(())
}

/// Parameters of the four-factor completion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSpec {
    pub a: u64,
    pub s: u64,
    pub u1: u64,
    pub u2: u64,
    pub b1: i64,
    pub b2: i64,
    pub n: f64,
}

impl PoissonSpec {
    pub fn modulus(&self) -> u64 {
        self.s * self.u1 * self.u2
    }

    fn validate(&self) -> Result<()> {
        require_cubefree(&[self.s, self.u1, self.u2])?;
        if self.a == 0 {
            return Err(Error::Zero("a"));
        }
        require_coprime(&[
            (self.a, self.s),
            (self.a, self.u1),
            (self.a, self.u2),
            (self.s, self.u1),
            (self.s, self.u2),
            (self.u1, self.u2),
        ])?;
        if !(self.n > 0.0 && self.n.is_finite()) {
            return param("N", format!("{} must be positive", self.n));
        }
        Ok(())
    }
}

/// Starting value of the frequency cutoff multiplier.
pub const DEFAULT_T_CUT: f64 = 40.0;

/// Doubling stops once successive truncations agree to this relative size.
pub const TAIL_TOL: f64 = 1e-8;

const MAX_DOUBLINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonReport {
    pub spec: PoissonSpec,
    /// `Σ_n ψ_N(n) F(n)`.
    pub direct: Complex64,
    /// `(1/c) Σ_{|h| ≤ H} ψ̂_N(h/c) S(h)` at the final cutoff.
    pub completed: Complex64,
    /// `(su₁u₂)^{1/2} 𝓟`.
    pub p_rhs: f64,
    /// Final cutoff multiplier `T`; `H = ⌈c T / N⌉`.
    pub t_cut: f64,
    pub h_max: u64,
    /// Relative change between the last two cutoffs.
    pub tail_change: f64,
    pub certified: bool,
}

impl PoissonReport {
    pub fn identity_error(&self) -> f64 {
        (self.direct - self.completed).norm() / (1.0 + self.direct.norm())
    }

    pub fn ratio(&self) -> f64 {
        self.direct.norm() / self.p_rhs
    }
}

/// `F(x) = Π_{i,j} Kl₂(a(x + b_j); s u_i)` over `x mod su₁u₂`.
pub fn poisson_profile(spec: &PoissonSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let c = spec.modulus();
    let t1 = KlTable::new(spec.s * spec.u1)?;
    let t2 = KlTable::new(spec.s * spec.u2)?;
    let a = spec.a as i128;
    Ok((0..c as i128)
        .map(|x| {
            let mut f = 1.0;
            for b in [spec.b1 as i128, spec.b2 as i128] {
                let arg = (a * (x + b)).rem_euclid(c as i128) as i64;
                f *= t1.at(arg) * t2.at(arg);
            }
            f
        })
        .collect())
}

/// Direct weighted sum against the symmetric window, and its Poisson
/// completion with an adaptively certified frequency cutoff.
pub fn poisson_complete(spec: &PoissonSpec) -> Result<PoissonReport> {
    poisson_complete_from(spec, DEFAULT_T_CUT)
}

pub fn poisson_complete_from(spec: &PoissonSpec, t_start: f64) -> Result<PoissonReport> {
    let profile = poisson_profile(spec)?;
    let weight = make_weight(WeightSpec::window_symmetric(spec.n))?;
    let c = spec.modulus();
    let direct = window_sum(&profile, &weight, spec.n);
    let sums = twisted_sums_all(&profile);
    let cf = c as f64;
    let term = |h: u64| -> Complex64 {
        // ψ̂ is real and even, so ±h pair up
        let w = weight.fourier(h as f64 / cf).re;
        let plus = sums[(h % c) as usize];
        if h == 0 {
            plus * w
        } else {
            (plus + sums[((c - h % c) % c) as usize]) * w
        }
    };
    let h_of = |t: f64| (cf * t / spec.n).ceil() as u64;
    let mut t = t_start;
    let mut h_done = h_of(t);
    let mut acc = ComplexNeumaier::new();
    for z in (0..=h_done).into_par_iter().map(term).collect::<Vec<_>>() {
        acc.add(z);
    }
    let mut tail_change = f64::INFINITY;
    let mut certified = false;
    for _ in 0..MAX_DOUBLINGS {
        let prev = acc.value() / cf;
        let h_next = h_of(2.0 * t);
        for z in ((h_done + 1)..=h_next)
            .into_par_iter()
            .map(term)
            .collect::<Vec<_>>()
        {
            acc.add(z);
        }
        let next = acc.value() / cf;
        h_done = h_next;
        t *= 2.0;
        tail_change = (next - prev).norm() / (1.0 + next.norm());
        if tail_change < TAIL_TOL {
            certified = true;
            break;
        }
    }
    Ok(PoissonReport {
        spec: *spec,
        direct,
        completed: acc.value() / cf,
        p_rhs: poisson_rhs(spec.s, spec.u1, spec.u2, spec.b1, spec.b2, spec.n)?,
        t_cut: t,
        h_max: h_done,
        tail_change,
        certified,
    })
}

fn window_sum(profile: &[f64], weight: &Weight, n: f64) -> Complex64 {
    let c = profile.len() as i64;
    let m = n.ceil() as i64;
    let mut acc = Neumaier::new();
    for k in -m..=m {
        let w = weight.eval(k as f64);
        if w != 0.0 {
            acc.add(w * profile[k.rem_euclid(c) as usize]);
        }
    }
    Complex64::new(acc.value(), 0.0)
}

/// Parameters of the shifted correlation sum over `(n, r) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvdcSpec {
    pub a: i64,
    pub r: u64,
    pub s: u64,
    pub u1: u64,
    pub u2: u64,
    pub c: u64,
    pub n: f64,
}

impl QvdcSpec {
    fn validate(&self) -> Result<()> {
        require_cubefree(&[self.s, self.u1, self.u2])?;
        if self.r == 0 {
            return Err(Error::Zero("r"));
        }
        if self.c == 0 || self.r % self.c != 0 {
            return Err(Error::NotDivisor(self.c, self.r));
        }
        let a = self.a.unsigned_abs();
        let mut pairs = vec![
            (a, self.r),
            (a, self.s),
            (a, self.u1),
            (a, self.u2),
            (self.r, self.s),
            (self.r, self.u1),
            (self.r, self.u2),
            (self.s, self.u1),
            (self.s, self.u2),
        ];
        // equal u's are allowed: the diagonal of the expanded square
        if self.u1 != self.u2 {
            pairs.push((self.u1, self.u2));
        }
        require_coprime(&pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvdcReport {
    pub spec: QvdcSpec,
    pub lhs: Complex64,
    pub rhs: f64,
    /// `d(rsu₁u₂)`, the divisor factor left out of `rhs`.
    pub divisor_factor: f64,
    pub terms: u64,
}

impl QvdcReport {
    pub fn ratio(&self) -> f64 {
        self.lhs.norm() / self.rhs
    }
}

/// `Σ_{(n,r)=c} ψ_N(n) Kl₂(an; rsu₁) Kl₂(an; rsu₂)` with `ψ_N` the window on
/// `[1/2, N]`.
pub fn qvdc_sum(spec: &QvdcSpec) -> Result<QvdcReport> {
    spec.validate()?;
    let rhs = qvdc_rhs(spec.r, spec.s, spec.u1, spec.u2, spec.c, spec.n)?;
    let divisor_factor = divisor_count(spec.r * spec.s * spec.u1 * spec.u2) as f64;
    let weight = make_weight(WeightSpec::window_half(spec.n))?;
    let top = spec.n.ceil() as i64;
    let ns: Vec<i64> = (1..=top.max(0))
        .filter(|&n| gcd(n as u64, spec.r) == spec.c && weight.eval(n as f64) != 0.0)
        .collect();
    let args: Vec<i64> = ns
        .iter()
        .map(|&n| spec.a.checked_mul(n).ok_or(Error::TooLarge {
            value: spec.a.unsigned_abs().saturating_mul(n as u64),
            bound: i64::MAX as u64,
        }))
        .collect::<Result<_>>()?;
    let q1 = spec.r * spec.s * spec.u1;
    let q2 = spec.r * spec.s * spec.u2;
    let k1 = eval_many(&KlPlan::new(q1)?, &args);
    let k2 = eval_many(&KlPlan::new(q2)?, &args);
    let lhs: ComplexNeumaier = ns
        .iter()
        .zip(k1.iter().zip(&k2))
        .map(|(&n, (x, y))| x * y * weight.eval(n as f64))
        .collect();
    Ok(QvdcReport {
        spec: *spec,
        lhs: lhs.value(),
        rhs,
        divisor_factor,
        terms: ns.len() as u64,
    })
}

/// Rule for the coefficients `λ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    DivisorCount,
    One,
    /// `±d(n)` with signs from a seeded ChaCha8 stream.
    RandomSignDivisor { seed: u64 },
}

/// Support of `γ_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Square-free `u ∈ (U, 2U]`, modulus `rsu`.
    SquareFree,
    /// Square-free `u` with `u² ∈ (U, 2U]`, modulus `rsu²`.
    SquaresOfSquareFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearSpec {
    pub r: u64,
    pub s: u64,
    pub a: i64,
    pub u: f64,
    pub n: u64,
    pub lambda: LambdaRule,
    pub support: Support,
    /// Exponent `e` in `γ̃_u = γ_u d(u)^e`.
    pub gamma_exponent: f64,
}

impl BilinearSpec {
    pub fn new(r: u64, s: u64, a: i64, u: f64, n: u64, support: Support) -> Self {
        Self {
            r,
            s,
            a,
            u,
            n,
            lambda: LambdaRule::DivisorCount,
            support,
            gamma_exponent: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        ModulusSplit {
            r: self.r,
            s: self.s,
            u: 1,
            a: self.a,
        }
        .validate(true)?;
        if !self.u.is_finite() || self.u < 0.0 {
            return param("U", format!("{} must be nonnegative", self.u));
        }
        Ok(())
    }

    /// `u` values carrying `γ_u = 1`, in increasing order.
    pub fn support_set(&self) -> Vec<u64> {
        let ars = self.a.unsigned_abs() * self.r * self.s;
        let ok = |u: u64| is_squarefree(u) && gcd(u, ars) == 1;
        match self.support {
            Support::SquareFree => {
                let lo = self.u.floor() as u64 + 1;
                let hi = (2.0 * self.u).floor() as u64;
                (lo.max(1)..=hi).filter(|&u| ok(u)).collect()
            }
            Support::SquaresOfSquareFree => {
                let hi = (2.0 * self.u).sqrt().floor() as u64 + 1;
                (1..=hi)
                    .filter(|&u| {
                        let sq = (u * u) as f64;
                        sq > self.u && sq <= 2.0 * self.u && ok(u)
                    })
                    .collect()
            }
        }
    }

    /// Modulus paired with `u`.
    pub fn modulus_for(&self, u: u64) -> u64 {
        match self.support {
            Support::SquareFree => self.r * self.s * u,
            Support::SquaresOfSquareFree => self.r * self.s * u * u,
        }
    }

    /// `λ_n` for `n = 1..=N`.
    pub fn lambda_values(&self) -> Vec<f64> {
        match self.lambda {
            LambdaRule::One => vec![1.0; self.n as usize],
            LambdaRule::DivisorCount => (1..=self.n).map(|n| divisor_count(n) as f64).collect(),
            LambdaRule::RandomSignDivisor { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (1..=self.n)
                    .map(|n| {
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        sign * divisor_count(n) as f64
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearReport {
    pub spec: BilinearSpec,
    pub lhs: Complex64,
    /// `Σ_{c|r} ‖λ^{(c)}‖₂ · 𝓚` with the paired reading of 𝓚.
    pub k_rhs: f64,
    /// Same with the diagonal reading.
    pub k_rhs_diagonal: f64,
    pub k: KBound,
    pub lambda_norm: f64,
    pub support: Vec<u64>,
}

impl BilinearReport {
    pub fn ratio(&self) -> f64 {
        self.lhs.norm() / self.k_rhs
    }
}

/// `Σ_u γ_u Σ_{n ≤ N} λ_n Kl₂(an; q_u)` with `γ_u = 1` on the support.
pub fn bilinear_sum(spec: &BilinearSpec) -> Result<BilinearReport> {
    spec.validate()?;
    let support = spec.support_set();
    let lambda = spec.lambda_values();
    let inner: Vec<Complex64> = support
        .par_iter()
        .map(|&u| -> Result<Complex64> {
            let values = kl2_batch(spec.a, spec.n, spec.modulus_for(u))?;
            Ok(values
                .iter()
                .zip(&lambda)
                .map(|(v, &l)| v.value * l)
                .collect::<ComplexNeumaier>()
                .value())
        })
        .collect::<Result<_>>()?;
    let lhs = inner.into_iter().collect::<ComplexNeumaier>().value();

    let (gamma, u_scale): (Vec<(u64, f64)>, f64) = match spec.support {
        Support::SquareFree => (
            support
                .iter()
                .map(|&u| (u, (divisor_count(u) as f64).powf(spec.gamma_exponent)))
                .collect(),
            spec.u,
        ),
        Support::SquaresOfSquareFree => (
            support
                .iter()
                .map(|&u| (u * u, (divisor_count(u * u) as f64).powf(spec.gamma_exponent)))
                .collect(),
            spec.u,
        ),
    };
    let k = bound_k(spec.r, spec.s, u_scale, spec.n as f64, &gamma)?;
    let lambda_norm = lambda_norm_sum(&lambda, spec.r);
    Ok(BilinearReport {
        spec: *spec,
        lhs,
        k_rhs: lambda_norm * k.paired,
        k_rhs_diagonal: lambda_norm * k.diagonal,
        k,
        lambda_norm,
        support,
    })
}

/// Straight double loop with per-term direct Kloosterman evaluation.
pub fn bilinear_naive(spec: &BilinearSpec) -> Result<Complex64> {
    spec.validate()?;
    let lambda = spec.lambda_values();
    let mut acc = ComplexNeumaier::new();
    for u in spec.support_set() {
        let q = spec.modulus_for(u);
        for n in 1..=spec.n {
            let arg = reduce(spec.a, q);
            let v = crate::kloosterman::kl2_direct(mul_mod(arg, n % q, q) as i64, q)?;
            acc.add(v.value * lambda[n as usize - 1]);
        }
    }
    Ok(acc.value())
}
