//! Normalised Kloosterman sums
//!
//! ```text
//! Kl₂(a; q) = q^{-1/2} Σ_{x mod q, (x,q)=1} e((a x + x̄)/q)
//! ```
//!
//! Three evaluation routes are provided:
//!
//! * [`kl2_direct`] sums the definition term by term;
//! * [`kl2_p2_closed`] evaluates odd prime-square moduli by stationary phase,
//!   `Kl₂(a; p²) = Σ_{ℓ² ≡ a (p²)} e(2ℓ/p²)`;
//! * [`kl2`] factors `q` and multiplies the prime-power pieces with the twist
//!   `Kl₂(a; rs) = Kl₂(r̄² a; s) · Kl₂(s̄² a; r)`.
//!
//! [`kl2_batch`] evaluates `Kl₂(a n; q)` for `n = 1..=N` through the same
//! per-prime-power plan as the scalar route, so both produce bit-identical
//! values.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arith::{gcd, hensel_lift_sqrt, inv_residue, mul_mod, reduce, sqrt_mod_p};
use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime};
use crate::sum::{e_q, twiddles, ComplexNeumaier};

/// Largest modulus evaluated term by term unless configured otherwise.
pub const DEFAULT_DIRECT_BUDGET: u64 = 10_000_000;

// keeps `a·x + x̄` inside u64
const HARD_DIRECT_LIMIT: u64 = 1 << 31;

/// A Kloosterman sum value together with its modulus and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlValue {
    pub value: Complex64,
    pub modulus: u64,
    pub argument: i64,
}

impl KlValue {
    /// The real part; the imaginary part is rounding noise.
    pub fn re(&self) -> f64 {
        self.value.re
    }

    /// `d(q)·gcd(a, q)^{1/2}`, the Estermann–Weil majorant.
    pub fn weil_bound(&self) -> f64 {
        let d = factorize(self.modulus).map(|f| f.divisor_count()).unwrap_or(1);
        d as f64 * (gcd(self.argument.unsigned_abs(), self.modulus) as f64).sqrt()
    }
}

/// Units modulo `q` with their inverses, plus a twiddle table, for direct
/// evaluation of `Kl₂(·; q)`.
#[derive(Debug, Clone)]
pub struct DirectKl {
    q: u64,
    units: Vec<(u64, u64)>,
    tw: Vec<Complex64>,
    norm: f64,
}

impl DirectKl {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_budget(q, DEFAULT_DIRECT_BUDGET)
    }

    pub fn with_budget(q: u64, budget: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Zero("q"));
        }
        let budget = budget.min(HARD_DIRECT_LIMIT);
        if q > budget {
            return Err(Error::OverDirectBudget { q, budget });
        }
        Ok(Self {
            q,
            units: units_with_inverses(q),
            tw: twiddles(q),
            norm: 1.0 / (q as f64).sqrt(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `Kl₂(a; q)` for a residue `a ∈ [0, q)`.
    pub fn eval_residue(&self, a: u64) -> Complex64 {
        debug_assert!(a < self.q);
        let q = self.q;
        let mut acc = ComplexNeumaier::new();
        for &(x, xi) in &self.units {
            acc.add(self.tw[((a * x + xi) % q) as usize]);
        }
        acc.value() * self.norm
    }

    pub fn eval(&self, a: i64) -> Complex64 {
        self.eval_residue(reduce(a, self.q))
    }
}

/// Units of `ℤ/q` in increasing order, paired with their inverses.
///
/// Inverses are computed with one modular inversion and a prefix-product
/// sweep (Montgomery's batch trick).
fn units_with_inverses(q: u64) -> Vec<(u64, u64)> {
    if q == 1 {
        return vec![(0, 0)];
    }
    let mut is_unit = vec![true; q as usize];
    is_unit[0] = false;
    for p in factorize(q).expect("q >= 1").primes() {
        let mut m = p;
        while m < q {
            is_unit[m as usize] = false;
            m += p;
        }
    }
    let units: Vec<u64> = (0..q).filter(|&x| is_unit[x as usize]).collect();
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u64;
    for &x in &units {
        acc = mul_mod(acc, x, q);
        prefix.push(acc);
    }
    let mut inv_acc = inv_residue(acc, q).expect("product of units is a unit");
    let mut out = vec![(0u64, 0u64); units.len()];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[i] = (units[i], mul_mod(inv_acc, before, q));
        inv_acc = mul_mod(inv_acc, units[i], q);
    }
    out
}

fn kl_value(value: Complex64, modulus: u64, argument: i64) -> KlValue {
    KlValue {
        value,
        modulus,
        argument,
    }
}

/// Direct summation of the definition. `q = 1` gives 1.
pub fn kl2_direct(a: i64, q: u64) -> Result<KlValue> {
    kl2_direct_with_budget(a, q, DEFAULT_DIRECT_BUDGET)
}

pub fn kl2_direct_with_budget(a: i64, q: u64, budget: u64) -> Result<KlValue> {
    let plan = DirectKl::with_budget(q, budget)?;
    Ok(kl_value(plan.eval(a), q, a))
}

/// Stationary-phase evaluation of `Kl₂(a; p²)` for an odd prime `p ∤ a`.
pub fn kl2_p2_closed(a: i64, p: u64) -> Result<KlValue> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let r = reduce(a, p);
    if r == 0 {
        return Err(Error::PrimeDividesArgument { p, a });
    }
    Ok(kl_value(p2_closed_residue(reduce(a, p * p), p), p * p, a))
}

fn p2_closed_residue(a: u64, p: u64) -> Complex64 {
    let p2 = p * p;
    let roots = sqrt_mod_p(a as i64, p).expect("p odd prime");
    let mut acc = ComplexNeumaier::new();
    for r in roots {
        let l = hensel_lift_sqrt(a, r, p);
        acc.add(e_q(mul_mod(2, l, p2), p2));
    }
    acc.value()
}

/// How one prime-power factor of the modulus is evaluated.
#[derive(Debug, Clone)]
enum FactorEval {
    /// Odd `p`, exponent 2: closed form for units, zero when `p | a`.
    PrimeSquare,
    Direct(DirectKl),
}

#[derive(Debug, Clone)]
struct FactorPlan {
    p: u64,
    pk: u64,
    /// `(q/p^k)‾²` modulo `p^k`.
    twist: u64,
    eval: FactorEval,
}

impl FactorPlan {
    fn eval_residue(&self, b: u64) -> Complex64 {
        match &self.eval {
            FactorEval::PrimeSquare => {
                if b % self.p == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    p2_closed_residue(b, self.p)
                }
            }
            FactorEval::Direct(d) => d.eval_residue(b),
        }
    }

    fn argument(&self, a: i64) -> u64 {
        mul_mod(self.twist, reduce(a, self.pk), self.pk)
    }
}

/// Factorised evaluation plan for `Kl₂(·; q)`.
#[derive(Debug, Clone)]
pub struct KlPlan {
    q: u64,
    factors: Vec<FactorPlan>,
}

impl KlPlan {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_budget(q, DEFAULT_DIRECT_BUDGET)
    }

    pub fn with_budget(q: u64, budget: u64) -> Result<Self> {
        let f = factorize(q)?;
        let mut factors = Vec::with_capacity(f.pairs().len());
        for (p, k, pk) in f.prime_powers() {
            let cof = q / pk;
            let ci = inv_residue(cof % pk, pk).expect("coprime cofactor");
            let twist = mul_mod(ci, ci, pk);
            let eval = if p != 2 && k == 2 {
                FactorEval::PrimeSquare
            } else if pk <= budget.min(HARD_DIRECT_LIMIT) {
                FactorEval::Direct(DirectKl::with_budget(pk, budget)?)
            } else {
                return Err(Error::UnsupportedModulus { p, k });
            };
            factors.push(FactorPlan { p, pk, twist, eval });
        }
        Ok(Self { q, factors })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn eval(&self, a: i64) -> Complex64 {
        self.factors
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, f| {
                acc * f.eval_residue(f.argument(a))
            })
    }
}

/// `Kl₂(a; q)` for any positive modulus, via factorisation and the twisted
/// multiplicativity.
pub fn kl2(a: i64, q: u64) -> Result<KlValue> {
    if q == 0 {
        return Err(Error::Zero("q"));
    }
    Ok(kl_value(KlPlan::new(q)?.eval(a), q, a))
}

/// `Kl₂(a·n; q)` for `n = 1..=n_max`, in order.
///
/// Values are bit-identical to scalar [`kl2`] calls. Each prime-power factor
/// is evaluated once per distinct residue that occurs.
pub fn kl2_batch(a: i64, n_max: u64, q: u64) -> Result<Vec<KlValue>> {
    if q == 0 {
        return Err(Error::Zero("q"));
    }
    let plan = KlPlan::new(q)?;
    let args = (1..=n_max as i64)
        .map(|n| {
            a.checked_mul(n).ok_or(Error::TooLarge {
                value: a.unsigned_abs().saturating_mul(n_max),
                bound: i64::MAX as u64,
            })
        })
        .collect::<Result<Vec<i64>>>()?;
    let values = eval_many(&plan, &args);
    Ok(args
        .into_iter()
        .zip(values)
        .map(|(arg, v)| kl_value(v, q, arg))
        .collect())
}

/// Evaluate a plan at many arguments, sharing per-factor work.
pub(crate) fn eval_many(plan: &KlPlan, args: &[i64]) -> Vec<Complex64> {
    let tables: Vec<HashMap<u64, Complex64>> = plan
        .factors
        .iter()
        .map(|f| {
            let mut residues: Vec<u64> = args.iter().map(|&a| f.argument(a)).collect();
            residues.sort_unstable();
            residues.dedup();
            let vals: Vec<Complex64> = residues.par_iter().map(|&b| f.eval_residue(b)).collect();
            residues.into_iter().zip(vals).collect()
        })
        .collect();
    args.iter()
        .map(|&a| {
            plan.factors
                .iter()
                .zip(&tables)
                .fold(Complex64::new(1.0, 0.0), |acc, (f, t)| {
                    acc * t[&f.argument(a)]
                })
        })
        .collect()
}

/// Lookup table of `Kl₂(b; q)` for every residue `b mod q`.
#[derive(Debug, Clone)]
pub struct KlTable {
    q: u64,
    values: Vec<f64>,
}

impl KlTable {
    /// Build the table with one FFT of length `q`.
    pub fn new(q: u64) -> Result<Self> {
        let values = kl2_all_residues(q)?.into_iter().map(|z| z.re).collect();
        Ok(Self { q, values })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn get(&self, b: u64) -> f64 {
        self.values[(b % self.q) as usize]
    }

    #[inline]
    pub fn at(&self, a: i64) -> f64 {
        self.values[reduce(a, self.q) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// All values `Kl₂(b; q)`, `b ∈ [0, q)`, straight from the definition.
///
/// The sum over units is a discrete Fourier transform of `x ↦ e(x̄/q)`, so
/// the whole table costs one FFT of length `q`.
pub fn kl2_all_residues(q: u64) -> Result<Vec<Complex64>> {
    if q == 0 {
        return Err(Error::Zero("q"));
    }
    if q > DEFAULT_DIRECT_BUDGET {
        return Err(Error::OverDirectBudget {
            q,
            budget: DEFAULT_DIRECT_BUDGET,
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); q as usize];
    for (x, xi) in units_with_inverses(q) {
        buf[x as usize] = e_q(xi, q);
    }
    // inverse direction: Σ_x f(x) e(+b x / q)
    let fft = FftPlanner::new().plan_fft_inverse(q as usize);
    fft.process(&mut buf);
    let norm = 1.0 / (q as f64).sqrt();
    Ok(buf.into_iter().map(|z| z * norm).collect())
}
