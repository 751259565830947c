//! Complete correlation sums of Kloosterman sums.
//!
//! Modulo a prime `p`:
//!
//! ```text
//! S(h) = Σ_{x ∈ F_p} e(xh/p) Π_i Kl₂(γ_i.x; p)
//! ```
//!
//! where `γ_i` are Möbius maps and `x` runs over the points at which every
//! `γ_i.x` is finite. Modulo `p²`, the factors are the affine maps
//! `x ↦ a_i (x + b_j)` in the two-factor shape `{(a₁,b₁), (a₁,b₂)}` or the
//! four-factor shape `{(a_i, b_j) : i, j ∈ {1, 2}}`.
//!
//! Writing `x = y + zp`, each `Kl₂(A; p²)` collapses to a sum over the roots
//! `y_k` of `ȳ_k² ≡ A (mod p)`, and summing over `z` yields
//! `|S(h)| ≤ p · N(h)`, where `N(h)` counts the tuples `(y, y_k)` with
//! `h + Σ a_{i(k)} y_k ≡ 0 (mod p)`. [`count_solution_system`] computes
//! `N(h)` exactly.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arith::{gcd3, inv_residue, mul_mod, reduce};
use crate::error::{param, Error, Result};
use crate::kloosterman::KlTable;
use crate::primes::is_prime;
use crate::sum::{e_q, ComplexNeumaier, Neumaier};

/// `x ↦ (a x + b) / (c x + d)` over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mobius {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    /// `x ↦ m (x + t)`.
    pub fn affine(m: i64, t: i64) -> Self {
        Self::new(m, m * t, 0, 1)
    }

    pub fn determinant(&self, p: u64) -> u64 {
        reduce(
            ((self.a as i128 * self.d as i128) - (self.b as i128 * self.c as i128))
                .rem_euclid(p as i128) as i64,
            p,
        )
    }

    /// `γ.x`, or `None` at the pole.
    pub fn apply(&self, x: u64, p: u64) -> Option<u64> {
        let [a, b, c, d] = self.residues(p);
        let den = (mul_mod(c, x, p) + d) % p;
        let num = (mul_mod(a, x, p) + b) % p;
        inv_residue(den, p).map(|i| mul_mod(num, i, p))
    }

    fn residues(&self, p: u64) -> [u64; 4] {
        [
            reduce(self.a, p),
            reduce(self.b, p),
            reduce(self.c, p),
            reduce(self.d, p),
        ]
    }

    /// Uniform invertible map modulo `p`, by rejection.
    pub fn random<R: Rng>(p: u64, rng: &mut R) -> Self {
        loop {
            let g = Mobius::new(
                rng.gen_range(0..p as i64),
                rng.gen_range(0..p as i64),
                rng.gen_range(0..p as i64),
                rng.gen_range(0..p as i64),
            );
            if g.determinant(p) != 0 {
                return g;
            }
        }
    }

    /// Canonical representative in `PGL₂(F_p)`: the first nonzero entry is 1.
    pub fn projective_class(&self, p: u64) -> [u64; 4] {
        let r = self.residues(p);
        let lead = r.iter().copied().find(|&v| v != 0).unwrap_or(1);
        let inv = inv_residue(lead, p).unwrap_or(1);
        r.map(|v| mul_mod(v, inv, p))
    }
}

/// Correlation sum modulo a prime.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeCorrelation {
    pub p: u64,
    pub h: i64,
    pub maps: Vec<Mobius>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareShape {
    /// `Kl₂(a₁(x+b₁)) Kl₂(a₁(x+b₂))`
    Two,
    /// `Π_{i,j} Kl₂(a_i(x+b_j))`
    Four,
}

/// Correlation sum modulo `p²` with affine factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareCorrelation {
    pub p: u64,
    pub h: i64,
    pub a1: i64,
    pub a2: i64,
    pub b1: i64,
    pub b2: i64,
    pub shape: SquareShape,
}

impl SquareCorrelation {
    pub fn two(p: u64, h: i64, a1: i64, b1: i64, b2: i64) -> Self {
        Self {
            p,
            h,
            a1,
            a2: a1,
            b1,
            b2,
            shape: SquareShape::Two,
        }
    }

    pub fn four(p: u64, h: i64, a1: i64, a2: i64, b1: i64, b2: i64) -> Self {
        Self {
            p,
            h,
            a1,
            a2,
            b1,
            b2,
            shape: SquareShape::Four,
        }
    }

    /// The `(multiplier, shift)` pairs, ordered `(a₁,b₁), (a₂,b₁), (a₁,b₂), (a₂,b₂)`
    /// for the four-factor shape.
    pub fn factors(&self) -> Vec<(i64, i64)> {
        match self.shape {
            SquareShape::Two => vec![(self.a1, self.b1), (self.a1, self.b2)],
            SquareShape::Four => vec![
                (self.a1, self.b1),
                (self.a2, self.b1),
                (self.a1, self.b2),
                (self.a2, self.b2),
            ],
        }
    }

    /// Bound shape `p·gcd(h, b₁−b₂, p)` (two factors) or
    /// `p·(gcd(h, a₁²−a₂², p) + gcd(h, b₁−b₂, p))` (four factors).
    pub fn bound_rhs(&self) -> f64 {
        self.p as f64 * self.gcd_terms() as f64
    }

    /// `gcd(h, b₁−b₂, p)`, plus `gcd(h, a₁²−a₂², p)` for four factors.
    pub fn gcd_terms(&self) -> u64 {
        let p = self.p;
        let h = reduce(self.h, p);
        let db = reduce(self.b1 - self.b2, p);
        let g_b = gcd3(h, db, p);
        match self.shape {
            SquareShape::Two => g_b,
            SquareShape::Four => {
                let a1 = reduce(self.a1, p);
                let a2 = reduce(self.a2, p);
                let da = (mul_mod(a1, a1, p) + p - mul_mod(a2, a2, p)) % p;
                gcd3(h, da, p) + g_b
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return param("p", format!("{} is not prime", self.p));
        }
        for a in [self.a1, self.a2] {
            if reduce(a, self.p) == 0 {
                return Err(Error::PrimeDividesArgument { p: self.p, a });
            }
        }
        Ok(())
    }
}

/// Either kind of complete correlation sum.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSpec {
    Prime(PrimeCorrelation),
    Square(SquareCorrelation),
}

impl CorrelationSpec {
    pub fn modulus(&self) -> u64 {
        match self {
            Self::Prime(s) => s.p,
            Self::Square(s) => s.p * s.p,
        }
    }

    pub fn prime(&self) -> u64 {
        match self {
            Self::Prime(s) => s.p,
            Self::Square(s) => s.p,
        }
    }

    /// Exponent of the prime-power modulus.
    pub fn k(&self) -> u32 {
        match self {
            Self::Prime(_) => 1,
            Self::Square(_) => 2,
        }
    }

    pub fn h(&self) -> i64 {
        match self {
            Self::Prime(s) => s.h,
            Self::Square(s) => s.h,
        }
    }

    pub fn with_h(&self, h: i64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::Prime(s) => s.h = h,
            Self::Square(s) => s.h = h,
        }
        out
    }

    pub fn factor_count(&self) -> usize {
        match self {
            Self::Prime(s) => s.maps.len(),
            Self::Square(s) => s.factors().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationValue {
    pub value: Complex64,
    pub spec: CorrelationSpec,
    pub bound_rhs: f64,
    pub ratio: f64,
}

fn correlation_value(value: Complex64, spec: CorrelationSpec, bound_rhs: f64) -> CorrelationValue {
    let ratio = if bound_rhs > 0.0 {
        value.norm() / bound_rhs
    } else {
        f64::INFINITY
    };
    CorrelationValue {
        value,
        spec,
        bound_rhs,
        ratio,
    }
}

fn validate_prime(spec: &PrimeCorrelation) -> Result<()> {
    if !is_prime(spec.p) {
        return param("p", format!("{} is not prime", spec.p));
    }
    if spec.maps.iter().any(|g| g.determinant(spec.p) == 0) {
        return Err(Error::DegenerateMap(spec.p));
    }
    Ok(())
}

/// `x ↦ Π_i Kl₂(γ_i.x; p)` on `F_p`, zero at the poles.
pub fn prime_profile(spec: &PrimeCorrelation, table: &KlTable) -> Result<Vec<f64>> {
    validate_prime(spec)?;
    debug_assert_eq!(table.modulus(), spec.p);
    let p = spec.p;
    Ok((0..p)
        .map(|x| {
            spec.maps.iter().try_fold(1.0, |acc, g| {
                g.apply(x, p).map(|y| acc * table.get(y))
            })
        })
        .map(|v| v.unwrap_or(0.0))
        .collect())
}

/// `x ↦ Π Kl₂(a_i(x+b_j); p²)` on `ℤ/p²`.
pub fn square_profile(spec: &SquareCorrelation, table: &KlTable) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = spec.p * spec.p;
    debug_assert_eq!(table.modulus(), m);
    let factors = spec.factors();
    Ok((0..m as i64)
        .map(|x| {
            factors
                .iter()
                .map(|&(a, b)| table.at(((a as i128 * (x as i128 + b as i128)).rem_euclid(m as i128)) as i64))
                .product()
        })
        .collect())
}

/// `Σ_x e(xh/m) F(x)` with compensated summation.
pub fn twisted_sum(profile: &[f64], h: i64) -> Complex64 {
    let m = profile.len() as u64;
    let hr = reduce(h, m);
    let mut acc = ComplexNeumaier::new();
    for (x, &f) in profile.iter().enumerate() {
        if f != 0.0 {
            acc.add(e_q(mul_mod(x as u64, hr, m), m) * f);
        }
    }
    acc.value()
}

/// `Σ_x e(xh/m) F(x)` for every `h ∈ [0, m)` by one FFT.
pub fn twisted_sums_all(profile: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = profile.iter().map(|&f| Complex64::new(f, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    buf
}

/// Complete sum modulo a prime, with `bound_rhs = √p`.
pub fn corr_sum_p(spec: &PrimeCorrelation) -> Result<CorrelationValue> {
    let table = KlTable::new(spec.p)?;
    corr_sum_p_with(spec, &table)
}

pub fn corr_sum_p_with(spec: &PrimeCorrelation, table: &KlTable) -> Result<CorrelationValue> {
    let profile = prime_profile(spec, table)?;
    let value = twisted_sum(&profile, spec.h);
    Ok(correlation_value(
        value,
        CorrelationSpec::Prime(spec.clone()),
        (spec.p as f64).sqrt(),
    ))
}

/// Whether `h ≠ 0` or some class in `PGL₂(F_p)` occurs an odd number of times.
pub fn prime_hypothesis_holds(spec: &PrimeCorrelation) -> bool {
    if reduce(spec.h, spec.p) != 0 {
        return true;
    }
    let mut counts: HashMap<[u64; 4], usize> = HashMap::new();
    for g in &spec.maps {
        *counts.entry(g.projective_class(spec.p)).or_default() += 1;
    }
    counts.values().any(|&c| c % 2 == 1)
}

/// Complete sum modulo `p²` with the two- or four-factor bound shape.
pub fn corr_sum_p2(spec: &SquareCorrelation) -> Result<CorrelationValue> {
    spec.validate()?;
    let table = KlTable::new(spec.p * spec.p)?;
    corr_sum_p2_with(spec, &table)
}

pub fn corr_sum_p2_with(spec: &SquareCorrelation, table: &KlTable) -> Result<CorrelationValue> {
    let profile = square_profile(spec, table)?;
    let value = twisted_sum(&profile, spec.h);
    Ok(correlation_value(
        value,
        CorrelationSpec::Square(*spec),
        spec.bound_rhs(),
    ))
}

/// Dispatch on the spec kind.
pub fn corr_sum(spec: &CorrelationSpec) -> Result<CorrelationValue> {
    match spec {
        CorrelationSpec::Prime(s) => corr_sum_p(s),
        CorrelationSpec::Square(s) => corr_sum_p2(s),
    }
}

/// Roots of `y² ≡ v (mod p)` for every residue `v`, by squaring every `y`.
fn root_table(p: u64) -> Vec<Vec<u64>> {
    let mut roots = vec![Vec::new(); p as usize];
    for y in 0..p {
        roots[mul_mod(y, y, p) as usize].push(y);
    }
    roots
}

/// Histogram over `L = Σ_k a_k y_k mod p` of the admissible tuples
/// `(y, y_1, …)`: entry `L` counts the solutions for `h ≡ −L`.
fn solution_histogram(p: u64, factors: &[(i64, i64)], roots: &[Vec<u64>]) -> Vec<u64> {
    let mut hist = vec![0u64; p as usize];
    let mut choices: Vec<&[u64]> = Vec::with_capacity(factors.len());
    'y: for y in 0..p {
        choices.clear();
        for &(a, b) in factors {
            let arg = mul_mod(reduce(a, p), (y + reduce(b, p)) % p, p);
            let Some(inv) = inv_residue(arg, p) else {
                continue 'y;
            };
            let r = &roots[inv as usize];
            if r.is_empty() {
                continue 'y;
            }
            choices.push(r);
        }
        // walk the product of the root sets
        let mut idx = vec![0usize; choices.len()];
        loop {
            let l = factors
                .iter()
                .zip(&choices)
                .zip(&idx)
                .fold(0u64, |acc, ((&(a, _), ch), &i)| {
                    (acc + mul_mod(reduce(a, p), ch[i], p)) % p
                });
            hist[l as usize] += 1;
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    continue 'y;
                }
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
    hist
}

/// Number of tuples `(y, y₁, …) ∈ (ℤ/p)^{1+K}` with
/// `ȳ_k² ≡ a_{i(k)}(y + b_{j(k)})` and `h + Σ_k a_{i(k)} y_k ≡ 0 (mod p)`.
///
/// The tuples are enumerated through the square roots of each condition, so
/// the cost is `O(2^K p)` rather than `p^{1+K}`. Works for both shapes; the
/// four-factor count is the system `(y, y₁, y₂, y₃, y₄)`.
pub fn count_solution_system(spec: &SquareCorrelation) -> Result<u64> {
    spec.validate()?;
    let p = spec.p;
    let hist = solution_histogram(p, &spec.factors(), &root_table(p));
    let h = reduce(spec.h, p);
    Ok(hist[((p - h) % p) as usize])
}

/// The same count by scanning all of `(ℤ/p)^{1+K}`. Only sensible for tiny `p`.
pub fn count_solution_system_exhaustive(spec: &SquareCorrelation) -> Result<u64> {
    spec.validate()?;
    let p = spec.p;
    let factors = spec.factors();
    let k = factors.len() as u32;
    let h = reduce(spec.h, p);
    let mut count = 0u64;
    for idx in 0..p.pow(k + 1) {
        let mut rest = idx;
        let y = rest % p;
        rest /= p;
        let mut lin = h;
        let mut ok = true;
        for &(a, b) in &factors {
            let yk = rest % p;
            rest /= p;
            let a = reduce(a, p);
            let Some(yi) = inv_residue(yk, p) else {
                ok = false;
                break;
            };
            if mul_mod(yi, yi, p) != mul_mod(a, (y + reduce(b, p)) % p, p) {
                ok = false;
                break;
            }
            lin = (lin + mul_mod(a, yk, p)) % p;
        }
        if ok && lin == 0 {
            count += 1;
        }
    }
    Ok(count)
}

/// `(Σ_h |S(h)|², m · Σ_x |F(x)|²)` over all frequencies `h mod m`.
pub fn parseval_check(spec: &CorrelationSpec) -> Result<(f64, f64)> {
    let profile = match spec {
        CorrelationSpec::Prime(s) => prime_profile(s, &KlTable::new(s.p)?)?,
        CorrelationSpec::Square(s) => square_profile(s, &KlTable::new(s.p * s.p)?)?,
    };
    let m = profile.len() as i64;
    let lhs: Neumaier = (0..m).map(|h| twisted_sum(&profile, h).norm_sqr()).collect();
    let rhs: Neumaier = profile.iter().map(|f| f * f).collect();
    Ok((lhs.value(), m as f64 * rhs.value()))
}

/// One grid point of the prime-square sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareSweepRow {
    pub p: u64,
    pub a1: u64,
    pub a2: u64,
    /// `b₂ − b₁` as an integer in `(−p, p)`.
    pub shift: i64,
    pub h: u64,
    /// Number of `(b₁, b₂) ∈ [0,p)²` with this shift.
    pub multiplicity: u64,
    pub abs_sum: f64,
    pub count: u64,
    pub gcd_terms: u64,
}

impl SquareSweepRow {
    /// `|S| / (p · count)`, 0 when both vanish.
    pub fn chain_ratio(&self) -> f64 {
        if self.count == 0 {
            if self.abs_sum <= CHAIN_SLACK {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_sum / (self.p as f64 * self.count as f64)
        }
    }

    pub fn chain_holds(&self) -> bool {
        self.abs_sum <= self.p as f64 * self.count as f64 + CHAIN_SLACK
    }

    pub fn count_ratio(&self) -> f64 {
        self.count as f64 / self.gcd_terms as f64
    }
}

/// Absolute slack allowed in `|S| ≤ p · count`.
pub const CHAIN_SLACK: f64 = 1e-6;

/// Constant in `count ≤ C·(gcd(h, a₁²−a₂², p) + gcd(h, b₁−b₂, p))`.
pub const COUNT_CONSTANT: u64 = 16;

/// Every `(a₁, a₂, b₁, b₂, h)` with `a_i` units and `b_j, h ∈ [0, p)`, for the
/// four-factor shape.
///
/// `|S|` depends on `(b₁, b₂)` only through the integer `b₂ − b₁` (shifting
/// `x` by `b₁` multiplies `S` by a unimodular phase) and the count only
/// through `b₂ − b₁ mod p`; rows carry the multiplicity of their shift class
/// so the whole grid is covered.
pub fn square_sweep_exhaustive(p: u64) -> Result<Vec<SquareSweepRow>> {
    let table = KlTable::new(p * p)?;
    let roots = root_table(p);
    let mut cells = Vec::new();
    for a1 in 1..p {
        for a2 in 1..p {
            for shift in -(p as i64 - 1)..(p as i64) {
                cells.push((a1, a2, shift));
            }
        }
    }
    let rows: Vec<Vec<SquareSweepRow>> = cells
        .par_iter()
        .map(|&(a1, a2, shift)| {
            let mult = p - shift.unsigned_abs();
            square_rows(p, a1, a2, 0, shift, mult, &table, &roots)
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Random `(a₁, a₂, b₁, b₂)` draws, each evaluated at every `h ∈ [0, p)`.
pub fn square_sweep_random<R: Rng>(p: u64, draws: usize, rng: &mut R) -> Result<Vec<SquareSweepRow>> {
    let table = KlTable::new(p * p)?;
    let roots = root_table(p);
    let cells: Vec<(u64, u64, i64, i64)> = (0..draws)
        .map(|_| {
            (
                rng.gen_range(1..p),
                rng.gen_range(1..p),
                rng.gen_range(0..p as i64),
                rng.gen_range(0..p as i64),
            )
        })
        .collect();
    let rows: Vec<Vec<SquareSweepRow>> = cells
        .par_iter()
        .map(|&(a1, a2, b1, b2)| square_rows(p, a1, a2, b1, b2 - b1, 1, &table, &roots))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[allow(clippy::too_many_arguments)]
fn square_rows(
    p: u64,
    a1: u64,
    a2: u64,
    b1: i64,
    shift: i64,
    multiplicity: u64,
    table: &KlTable,
    roots: &[Vec<u64>],
) -> Vec<SquareSweepRow> {
    let spec = SquareCorrelation::four(p, 0, a1 as i64, a2 as i64, b1, b1 + shift);
    let profile = square_profile(&spec, table).expect("validated grid");
    let sums = twisted_sums_all(&profile);
    let hist = solution_histogram(p, &spec.factors(), roots);
    (0..p)
        .map(|h| {
            let s = SquareCorrelation { h: h as i64, ..spec };
            SquareSweepRow {
                p,
                a1,
                a2,
                shift,
                h,
                multiplicity,
                abs_sum: sums[h as usize].norm(),
                count: hist[((p - h) % p) as usize],
                gcd_terms: s.gcd_terms(),
            }
        })
        .collect()
}

/// Summary of a Lemma-style sweep modulo primes.
#[derive(Debug, Clone)]
pub struct PrimeSweep {
    /// `(p, k, h, |S|/√p)` for every hypothesis-satisfying draw.
    pub rows: Vec<(u64, usize, i64, f64)>,
    /// Largest `|S|/√p` over hypothesis-satisfying draws, per factor count.
    pub constants: Vec<(usize, f64)>,
    /// `(p, |S|/√p)` for the paired, `h = 0`, four-factor specs.
    pub paired: Vec<(u64, f64)>,
}

impl PrimeSweep {
    pub fn constant(&self) -> f64 {
        self.constants.iter().map(|&(_, c)| c).fold(0.0, f64::max)
    }
}


/// Draw `draws` random specs with `k ∈ factor_counts` over `primes`, keep
/// those satisfying the hypothesis, and record `|S|/√p`. Also evaluates
/// `paired` specs `(γ₁, γ₁, γ₂, γ₂)` at `h = 0`, which violate it.
pub fn prime_sweep<R: Rng>(
    primes: &[u64],
    factor_counts: &[usize],
    draws: usize,
    paired: usize,
    rng: &mut R,
) -> Result<PrimeSweep> {
    let mut specs = Vec::with_capacity(draws);
    while specs.len() < draws {
        let p = primes[rng.gen_range(0..primes.len())];
        let k = factor_counts[rng.gen_range(0..factor_counts.len())];
        let maps = (0..k).map(|_| Mobius::random(p, rng)).collect();
        let spec = PrimeCorrelation {
            p,
            h: rng.gen_range(0..p as i64),
            maps,
        };
        if prime_hypothesis_holds(&spec) {
            specs.push(spec);
        }
    }
    let paired_specs: Vec<PrimeCorrelation> = (0..paired)
        .map(|_| {
            let p = primes[rng.gen_range(0..primes.len())];
            let g1 = Mobius::random(p, rng);
            let g2 = Mobius::random(p, rng);
            PrimeCorrelation {
                p,
                h: 0,
                maps: vec![g1, g1, g2, g2],
            }
        })
        .collect();
    let mut tables: HashMap<u64, KlTable> = HashMap::new();
    for &p in primes {
        tables.insert(p, KlTable::new(p)?);
    }
    let eval = |s: &PrimeCorrelation| -> Result<f64> {
        let v = corr_sum_p_with(s, &tables[&s.p])?;
        Ok(v.value.norm() / (s.p as f64).sqrt())
    };
    let normalised: Vec<f64> = specs.par_iter().map(eval).collect::<Result<_>>()?;
    let paired_vals: Vec<f64> = paired_specs.par_iter().map(eval).collect::<Result<_>>()?;
    let rows: Vec<(u64, usize, i64, f64)> = specs
        .iter()
        .zip(&normalised)
        .map(|(s, &r)| (s.p, s.maps.len(), s.h, r))
        .collect();
    let constants = factor_counts
        .iter()
        .map(|&k| {
            let c = rows
                .iter()
                .filter(|r| r.1 == k)
                .map(|r| r.3)
                .fold(0.0, f64::max);
            (k, c)
        })
        .collect();
    Ok(PrimeSweep {
        rows,
        constants,
        paired: paired_specs.iter().map(|s| s.p).zip(paired_vals).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kloosterman::kl2_direct;
    use rand::SeedableRng;

    fn kl(a: i64, q: u64) -> f64 {
        kl2_direct(a, q).unwrap().re()
    }

    /// Brute-force modulo p²: every factor straight from the definition.
    fn brute_square(spec: &SquareCorrelation) -> Complex64 {
        let m = spec.p * spec.p;
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..m as i64 {
            let prod: f64 = spec.factors().iter().map(|&(a, b)| kl(a * (x + b), m)).product();
            s += e_q(reduce(x * spec.h, m), m) * prod;
        }
        s
    }

    #[test]
    fn prime_examples() {
        let two = PrimeCorrelation {
            p: 3,
            h: 0,
            maps: vec![Mobius::IDENTITY; 2],
        };
        let v = corr_sum_p(&two).unwrap();
        let oracle: f64 = (0..3).map(|x| kl(x, 3).powi(2)).sum();
        assert!((oracle - 2.0).abs() < 1e-12);
        assert!((v.value.re - 2.0).abs() < 1e-12 && v.value.im.abs() < 1e-12);
        assert!((v.bound_rhs - 3f64.sqrt()).abs() < 1e-15);

        let twisted = corr_sum_p(&PrimeCorrelation { h: 1, ..two.clone() }).unwrap();
        assert!((twisted.value.norm() - 1.0).abs() < 1e-12);

        let single = PrimeCorrelation {
            p: 5,
            h: 0,
            maps: vec![Mobius::IDENTITY],
        };
        let oracle: f64 = (0..5).map(|x| kl(x, 5)).sum();
        assert!((corr_sum_p(&single).unwrap().value.re - oracle).abs() < 1e-12);
        assert!(oracle.abs() < 1e-12);
    }

    #[test]
    fn poles_are_skipped() {
        let p = 7;
        let g = Mobius::new(1, 0, 1, 1); // x / (x + 1), pole at x = 6
        let spec = PrimeCorrelation {
            p,
            h: 2,
            maps: vec![g, Mobius::IDENTITY],
        };
        let mut want = Complex64::new(0.0, 0.0);
        for x in 0..p {
            if (x + 1) % p == 0 {
                continue;
            }
            let gx = x * crate::arith::mod_inv(x as i64 + 1, p).unwrap() % p;
            want += e_q(2 * x % p, p) * kl(gx as i64, p) * kl(x as i64, p);
        }
        let got = corr_sum_p(&spec).unwrap().value;
        assert!((got - want).norm() < 1e-12);
        let bad = PrimeCorrelation {
            p,
            h: 0,
            maps: vec![Mobius::new(2, 4, 1, 2)],
        };
        assert_eq!(corr_sum_p(&bad), Err(Error::DegenerateMap(7)));
    }

    #[test]
    fn hypothesis_detection() {
        let p = 11;
        let g = Mobius::new(2, 3, 1, 5);
        let g_scaled = Mobius::new(4, 6, 2, 10);
        let paired = PrimeCorrelation {
            p,
            h: 0,
            maps: vec![g, g_scaled, Mobius::IDENTITY, Mobius::IDENTITY],
        };
        assert!(!prime_hypothesis_holds(&paired));
        assert!(prime_hypothesis_holds(&PrimeCorrelation { h: 3, ..paired.clone() }));
        let odd = PrimeCorrelation {
            p,
            h: 0,
            maps: vec![g, g, g, Mobius::IDENTITY],
        };
        assert!(prime_hypothesis_holds(&odd));
    }

    #[test]
    fn square_examples() {
        let two = SquareCorrelation::two(3, 0, 1, 0, 0);
        let v = corr_sum_p2(&two).unwrap();
        let oracle: f64 = (0..9).map(|x| kl(x, 9).powi(2)).sum();
        assert!((v.value.re - oracle).abs() < 1e-12);
        assert!((v.value - brute_square(&two)).norm() < 1e-12);

        let four = SquareCorrelation::four(3, 1, 1, 2, 0, 1);
        let v = corr_sum_p2(&four).unwrap();
        assert!((v.value - brute_square(&four)).norm() < 1e-12);
        assert_eq!(four.gcd_terms(), 2);
        assert_eq!(v.bound_rhs, 6.0);

        // h ≡ 0, a₁ = a₂, b₁ = b₂: a sum of fourth powers
        let quartic = SquareCorrelation::four(5, 0, 3, 3, 2, 2);
        let v = corr_sum_p2(&quartic).unwrap();
        let oracle: f64 = (0..25).map(|x| kl(3 * (x + 2), 25).powi(4)).sum();
        assert!((v.value.re - oracle).abs() < 1e-10);
        assert!(v.value.re >= 0.0 && v.value.im.abs() < 1e-10);

        assert!(matches!(
            corr_sum_p2(&SquareCorrelation::four(5, 0, 5, 1, 0, 0)),
            Err(Error::PrimeDividesArgument { p: 5, a: 5 })
        ));
    }

    #[test]
    fn count_examples() {
        let s = SquareCorrelation::four(5, 0, 1, 4, 0, 0);
        let c = count_solution_system(&s).unwrap();
        assert_eq!(c, count_solution_system_exhaustive(&s).unwrap());
        let s = SquareCorrelation::four(3, 1, 1, 2, 0, 1);
        assert_eq!(
            count_solution_system(&s).unwrap(),
            count_solution_system_exhaustive(&s).unwrap()
        );
        // a₁(y+b) a non-residue for every y is impossible over a full residue
        // system, but a two-factor spec with a₁ a non-residue and b₁ = b₂ at a
        // prime where the relevant residues never occur still yields zero
        // whenever the square conditions fail identically:
        let p = 3;
        let zero = SquareCorrelation::two(p, 1, 2, 0, 0);
        // ȳ² ≡ 2(y) needs 2y ∈ {1}: y = 2 only, y₁ ∈ {1, 2}, 1 + 2y₁ + 2y₂ ≢ 0 for y₁ = y₂
        let c = count_solution_system(&zero).unwrap();
        assert_eq!(c, count_solution_system_exhaustive(&zero).unwrap());
    }

    #[test]
    fn count_fast_equals_exhaustive() {
        for p in [3u64, 5, 7] {
            for a1 in 1..p as i64 {
                for a2 in 1..p as i64 {
                    for b2 in 0..p as i64 {
                        for h in 0..p as i64 {
                            let s = SquareCorrelation::four(p, h, a1, a2, 0, b2);
                            assert_eq!(
                                count_solution_system(&s).unwrap(),
                                count_solution_system_exhaustive(&s).unwrap()
                            );
                            let t = SquareCorrelation::two(p, h, a1, 1, b2);
                            assert_eq!(
                                count_solution_system(&t).unwrap(),
                                count_solution_system_exhaustive(&t).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chain_inequality_small_primes_both_shapes() {
        for p in [3u64, 5, 7] {
            let table = KlTable::new(p * p).unwrap();
            for a1 in 1..p as i64 {
                for a2 in 1..p as i64 {
                    for b1 in 0..p as i64 {
                        for b2 in 0..p as i64 {
                            for h in 0..p as i64 {
                                let s = SquareCorrelation::four(p, h, a1, a2, b1, b2);
                                let v = corr_sum_p2_with(&s, &table).unwrap().value.norm();
                                let c = count_solution_system(&s).unwrap();
                                assert!(v <= p as f64 * c as f64 + CHAIN_SLACK);
                                let t = SquareCorrelation::two(p, h, a1, b1, b2);
                                let v = corr_sum_p2_with(&t, &table).unwrap().value.norm();
                                let c = count_solution_system(&t).unwrap();
                                assert!(v <= p as f64 * c as f64 + CHAIN_SLACK);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shift_changes_only_the_phase() {
        let p = 5;
        let table = KlTable::new(25).unwrap();
        for h in 0..5 {
            let base = corr_sum_p2_with(&SquareCorrelation::four(p, h, 1, 2, 0, 3), &table).unwrap();
            for b1 in 0..5 {
                let s = SquareCorrelation::four(p, h, 1, 2, b1, b1 + 3);
                let v = corr_sum_p2_with(&s, &table).unwrap();
                assert!((v.value.norm() - base.value.norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fft_sums_match_direct() {
        let s = SquareCorrelation::four(7, 0, 1, 3, 2, 5);
        let profile = square_profile(&s, &KlTable::new(49).unwrap()).unwrap();
        let all = twisted_sums_all(&profile);
        for h in 0..49 {
            assert!((all[h as usize] - twisted_sum(&profile, h)).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval_examples() {
        let cases = [
            CorrelationSpec::Prime(PrimeCorrelation {
                p: 3,
                h: 0,
                maps: vec![Mobius::IDENTITY; 2],
            }),
            CorrelationSpec::Square(SquareCorrelation::two(3, 0, 1, 0, 1)),
            CorrelationSpec::Prime(PrimeCorrelation {
                p: 7,
                h: 0,
                maps: vec![
                    Mobius::IDENTITY,
                    Mobius::affine(2, 1),
                    Mobius::new(1, 1, 1, 3),
                    Mobius::affine(3, 5),
                ],
            }),
        ];
        for spec in &cases {
            let (l, r) = parseval_check(spec).unwrap();
            assert!((l - r).abs() <= 1e-8 * r.max(1.0), "{l} vs {r}");
        }
    }

    #[test]
    fn conjugate_symmetry_in_h() {
        let spec = PrimeCorrelation {
            p: 13,
            h: 4,
            maps: vec![Mobius::affine(2, 1), Mobius::new(1, 2, 3, 4)],
        };
        let plus = corr_sum_p(&spec).unwrap().value;
        let minus = corr_sum_p(&PrimeCorrelation { h: -4, ..spec }).unwrap().value;
        assert!((plus - minus.conj()).norm() < 1e-12);
        let sq = SquareCorrelation::four(5, 3, 1, 2, 0, 1);
        let plus = corr_sum_p2(&sq).unwrap().value;
        let minus = corr_sum_p2(&SquareCorrelation { h: -3, ..sq }).unwrap().value;
        assert!((plus - minus.conj()).norm() < 1e-10);
    }

    #[test]
    fn exhaustive_sweep_small() {
        let rows = square_sweep_exhaustive(5).unwrap();
        let covered: u64 = rows.iter().map(|r| r.multiplicity).sum();
        assert_eq!(covered, 4 * 4 * 25 * 5);
        assert!(rows.iter().all(|r| r.chain_holds()));
        assert!(rows.iter().all(|r| r.count <= COUNT_CONSTANT * r.gcd_terms));
    }

    #[test]
    fn sweep_rows_agree_with_direct_sums() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows = square_sweep_random(11, 3, &mut rng).unwrap();
        let table = KlTable::new(121).unwrap();
        for r in rows.iter().step_by(5) {
            let s = SquareCorrelation::four(11, r.h as i64, r.a1 as i64, r.a2 as i64, 0, r.shift);
            let v = corr_sum_p2_with(&s, &table).unwrap().value.norm();
            assert!((v - r.abs_sum).abs() < 1e-9);
            assert_eq!(count_solution_system(&s).unwrap(), r.count);
        }
    }

    #[test]
    fn prime_sweep_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sw = prime_sweep(&[11, 13, 17], &[2, 4], 60, 10, &mut rng).unwrap();
        assert_eq!(sw.rows.len(), 60);
        assert!(sw.constant().is_finite());
        assert_eq!(sw.paired.len(), 10);
    }
}
