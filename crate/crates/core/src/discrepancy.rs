//! Divisor-function discrepancy in arithmetic progressions.
//!
//! ```text
//! Δ(X; q, a)   = Σ_{n ≤ X, n ≡ a (q)} d(n) − (1/φ(q)) Σ_{n ≤ X, (n,q)=1} d(n)
//! Δ^ψ(X; q, a) = Σ_n ψ(n/X) d(n) (𝟙_{n ≡ a (q)} − 𝟙_{(n,q)=1}/φ(q))
//! ```
//!
//! Sharp sums are exact integers; the coprime sum over many moduli is
//! assembled from the divisibility sums `S_e = Σ_{e | n} d(n)` by Möbius
//! inversion over the divisors of `rad(q)`.

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::arith::{euler_phi, gcd, gcd_signed, is_cubefree, is_squarefree, mobius, reduce};
use crate::bounds::{bound_l, bound_m};
use crate::error::{param, Error, Result};
use crate::primes::factorize;
use crate::sieve::{DivisorSieve, DivisorTable};
use crate::sum::Neumaier;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyRecord {
    pub x: f64,
    pub q: u64,
    pub a: u64,
    /// `Σ_{n ≤ X, n ≡ a} d(n)`.
    pub ap_sum: u64,
    /// `Σ_{n ≤ X, (n,q)=1} d(n)`.
    pub coprime_sum: u64,
    pub phi: u64,
    pub delta_exact: Ratio<i128>,
    pub delta: f64,
    pub delta_smooth: Option<f64>,
    /// `X log X / q`.
    pub trivial_scale: f64,
}

impl DiscrepancyRecord {
    fn new(x: f64, q: u64, a: u64, ap_sum: u64, coprime_sum: u64) -> Self {
        let phi = euler_phi(q);
        let delta_exact = Ratio::new(
            phi as i128 * ap_sum as i128 - coprime_sum as i128,
            phi as i128,
        );
        let delta = *delta_exact.numer() as f64 / *delta_exact.denom() as f64;
        Self {
            x,
            q,
            a,
            ap_sum,
            coprime_sum,
            phi,
            delta_exact,
            delta,
            delta_smooth: None,
            trivial_scale: x * x.ln() / q as f64,
        }
    }

    /// `num/den` of the exact value.
    pub fn exact_string(&self) -> String {
        format!("{}/{}", self.delta_exact.numer(), self.delta_exact.denom())
    }
}

fn check_x(x: f64) -> Result<u64> {
    if !(x >= 1.0 && x.is_finite()) {
        return param("X", format!("{x} must be at least 1"));
    }
    Ok(x.floor() as u64)
}

fn check_unit(q: u64, a: i64) -> Result<u64> {
    if q == 0 {
        return Err(Error::Zero("q"));
    }
    if gcd_signed(a, q) != 1 {
        return Err(Error::NotCoprime(a.unsigned_abs(), q));
    }
    Ok(reduce(a, q))
}

/// `Δ(X; q, a)` by one streaming pass over the divisor sieve.
pub fn delta(x: f64, q: u64, a: i64) -> Result<DiscrepancyRecord> {
    let a = check_unit(q, a)?;
    let top = check_x(x)?;
    let mut ap = 0u64;
    let mut cop = 0u64;
    DivisorSieve::new().for_each_block(1, top, |start, block| {
        for (i, &d) in block.iter().enumerate() {
            let n = start + i as u64;
            if gcd(n, q) == 1 {
                cop += d as u64;
                if n % q == a {
                    ap += d as u64;
                }
            }
        }
    })?;
    Ok(DiscrepancyRecord::new(x, q, a, ap, cop))
}

/// Divisor counts on `[1, X]` shared by many `Δ(X; q, ·)` evaluations.
#[derive(Debug, Clone)]
pub struct DeltaTable {
    x: f64,
    table: DivisorTable,
}

impl DeltaTable {
    pub fn new(x: f64) -> Result<Self> {
        let top = check_x(x)?;
        Ok(Self {
            x,
            table: DivisorSieve::new().table(1, top)?,
        })
    }

    /// `Σ_{n ≤ X, n ≡ b (q)} d(n)` for every `b mod q`.
    pub fn residue_sums(&self, q: u64) -> Vec<u64> {
        let mut sums = vec![0u64; q as usize];
        for (i, &d) in self.table.values().iter().enumerate() {
            sums[((i as u64 + 1) % q) as usize] += d as u64;
        }
        sums
    }

    pub fn record(&self, q: u64, a: i64) -> Result<DiscrepancyRecord> {
        let a = check_unit(q, a)?;
        let sums = self.residue_sums(q);
        let cop = (0..q).filter(|&b| gcd(b, q) == 1).map(|b| sums[b as usize]).sum();
        Ok(DiscrepancyRecord::new(self.x, q, a, sums[a as usize], cop))
    }

    /// `Δ(X; q, a)` for every unit `a mod q`, in increasing `a`.
    pub fn all_units(&self, q: u64) -> Vec<DiscrepancyRecord> {
        let sums = self.residue_sums(q);
        let units: Vec<u64> = (0..q).filter(|&b| gcd(b, q) == 1).collect();
        let cop: u64 = units.iter().map(|&b| sums[b as usize]).sum();
        units
            .into_iter()
            .map(|b| DiscrepancyRecord::new(self.x, q, b, sums[b as usize], cop))
            .collect()
    }
}

/// Exact `Σ_a Δ(X; q, a)` over the units `a mod q`.
pub fn partition_sum(records: &[DiscrepancyRecord]) -> Ratio<i128> {
    records
        .iter()
        .fold(Ratio::from_integer(0), |acc, r| acc + r.delta_exact)
}

/// `Δ(X; q, a)` for many moduli at one residue `a`, from one sieve pass.
///
/// Moduli with `gcd(a, q) > 1` yield `None`. Work per block is
/// `Σ_q B/q + Σ_e B/e` over the moduli and the square-free divisors `e` of
/// their radicals.
pub fn delta_many(x: f64, moduli: &[u64], a: i64) -> Result<Vec<Option<DiscrepancyRecord>>> {
    delta_many_with(x, moduli, a, DivisorSieve::new())
}

pub fn delta_many_with(
    x: f64,
    moduli: &[u64],
    a: i64,
    sieve: DivisorSieve,
) -> Result<Vec<Option<DiscrepancyRecord>>> {
    let top = check_x(x)?;
    if moduli.contains(&0) {
        return Err(Error::Zero("q"));
    }
    let radical_divisors: Vec<Vec<(u64, i32)>> = moduli
        .par_iter()
        .map(|&q| -> Result<Vec<(u64, i32)>> {
            let rad = factorize(q)?.radical();
            Ok(crate::arith::divisors(rad)
                .into_iter()
                .map(|e| (e, mobius(e)))
                .collect())
        })
        .collect::<Result<_>>()?;
    let es: Vec<u64> = radical_divisors
        .iter()
        .flatten()
        .map(|&(e, _)| e)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let residues: Vec<u64> = moduli.iter().map(|&q| reduce(a, q)).collect();
    let partials = sieve.map_blocks(1, top, |start, block| {
        let end = start + block.len() as u64 - 1;
        let ap: Vec<u64> = moduli
            .iter()
            .zip(&residues)
            .map(|(&q, &b)| multiples_sum(start, end, block, q, b))
            .collect();
        let se: Vec<u64> = es.iter().map(|&e| multiples_sum(start, end, block, e, 0)).collect();
        (ap, se)
    })?;
    let mut ap = vec![0u64; moduli.len()];
    let mut se = vec![0u64; es.len()];
    for (pa, ps) in partials {
        ap.iter_mut().zip(pa).for_each(|(t, v)| *t += v);
        se.iter_mut().zip(ps).for_each(|(t, v)| *t += v);
    }
    let se_of: HashMap<u64, u64> = es.into_iter().zip(se).collect();
    Ok(moduli
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            if gcd_signed(a, q) != 1 {
                return None;
            }
            let cop: i128 = radical_divisors[i]
                .iter()
                .map(|&(e, mu)| mu as i128 * se_of[&e] as i128)
                .sum();
            Some(DiscrepancyRecord::new(x, q, residues[i], ap[i], cop as u64))
        })
        .collect())
}

/// `Σ d(n)` over `n ∈ [start, end]` with `n ≡ b (mod q)`.
fn multiples_sum(start: u64, end: u64, block: &[u32], q: u64, b: u64) -> u64 {
    let first = start + (b + q - start % q) % q;
    let mut n = first;
    let mut s = 0u64;
    while n <= end {
        s += block[(n - start) as usize] as u64;
        n += q;
    }
    s
}

/// `w_n = ψ(n/X) d(n)` on the support `(X, 2X)` of a bump weight.
#[derive(Debug)]
pub struct SmoothTable {
    x: f64,
    start: u64,
    w: Vec<f64>,
    divisible: std::sync::Mutex<HashMap<u64, f64>>,
}

impl SmoothTable {
    pub fn new(x: f64, weight: &Weight) -> Result<Self> {
        check_x(x)?;
        let (lo, hi) = weight.support();
        let start = ((lo * x).floor() as u64 + 1).max(1);
        let end = (hi * x).ceil() as u64;
        let table = DivisorSieve::new().table(start, end)?;
        let w = table
            .values()
            .iter()
            .enumerate()
            .map(|(i, &d)| weight.eval((start + i as u64) as f64 / x) * d as f64)
            .collect();
        Ok(Self {
            x,
            start,
            w,
            divisible: Default::default(),
        })
    }

    fn end(&self) -> u64 {
        self.start + self.w.len() as u64 - 1
    }

    fn progression(&self, q: u64, b: u64) -> f64 {
        let first = self.start + (b + q - self.start % q) % q;
        let mut n = first;
        let mut acc = Neumaier::new();
        while n <= self.end() {
            acc.add(self.w[(n - self.start) as usize]);
            n += q;
        }
        acc.value()
    }

    fn divisible_sum(&self, e: u64) -> f64 {
        if let Some(&v) = self.divisible.lock().unwrap().get(&e) {
            return v;
        }
        let v = self.progression(e, 0);
        self.divisible.lock().unwrap().insert(e, v);
        v
    }

    /// `Δ^ψ(X; q, a)`.
    pub fn delta(&self, q: u64, a: i64) -> Result<f64> {
        let b = check_unit(q, a)?;
        let rad = factorize(q)?.radical();
        let mut cop = Neumaier::new();
        for e in crate::arith::divisors(rad) {
            cop.add(mobius(e) as f64 * self.divisible_sum(e));
        }
        Ok(self.progression(q, b) - cop.value() / euler_phi(q) as f64)
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// `Δ^ψ(X; q, a)` by a direct loop over `n`.
pub fn delta_smooth(x: f64, q: u64, a: i64, weight: &Weight) -> Result<f64> {
    let b = check_unit(q, a)?;
    check_x(x)?;
    let (lo, hi) = weight.support();
    let start = ((lo * x).floor() as u64 + 1).max(1);
    let end = (hi * x).ceil() as u64;
    let table = DivisorSieve::new().table(start, end)?;
    let phi = euler_phi(q) as f64;
    let mut ap = Neumaier::new();
    let mut cop = Neumaier::new();
    for (i, &d) in table.values().iter().enumerate() {
        let n = start + i as u64;
        if gcd(n, q) != 1 {
            continue;
        }
        let w = weight.eval(n as f64 / x) * d as f64;
        cop.add(w);
        if n % q == b {
            ap.add(w);
        }
    }
    Ok(ap.value() - cop.value() / phi)
}

/// Which of the four range conditions hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeReport {
    /// `s³U⁶ < X^{2−ε}`, `r ≤ X^{1/3−ε}`, `U > X^ε`, `r¹²s⁹U⁶ < X^{8−ε}`.
    pub conditions: [bool; 4],
    /// `log(rhs) − log(lhs)` for each condition; positive means room to spare.
    pub margins: [f64; 4],
    /// `ε ≤ 0`: the strict and non-strict versions coincide at the boundary.
    pub degenerate: bool,
}

impl RangeReport {
    pub fn all(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }
}

pub fn range_check(r: f64, s: f64, u: f64, x: f64, eps: f64) -> RangeReport {
    let lx = x.ln();
    let margins = [
        (2.0 - eps) * lx - (3.0 * s.ln() + 6.0 * u.ln()),
        (1.0 / 3.0 - eps) * lx - r.ln(),
        u.ln() - eps * lx,
        (8.0 - eps) * lx - (12.0 * r.ln() + 9.0 * s.ln() + 6.0 * u.ln()),
    ];
    let conditions = [margins[0] > 0.0, margins[1] >= 0.0, margins[2] > 0.0, margins[3] > 0.0];
    RangeReport {
        conditions,
        margins,
        degenerate: eps <= 0.0,
    }
}

/// Averaged discrepancy against its bound expression.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageReport {
    pub r: u64,
    pub s: u64,
    pub u: f64,
    pub x: f64,
    pub a: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `(u, modulus, Δ^ψ)` for every term.
    pub terms: Vec<(u64, u64, f64)>,
    pub range: RangeReport,
}

fn check_rs(r: u64, s: u64, a: i64) -> Result<()> {
    if r == 0 {
        return Err(Error::Zero("r"));
    }
    if s == 0 {
        return Err(Error::Zero("s"));
    }
    if !is_cubefree(s) {
        return Err(Error::NotCubeFree(s));
    }
    if gcd(r, s) != 1 {
        return Err(Error::NotCoprime(r, s));
    }
    if gcd_signed(a, r * s) != 1 {
        return Err(Error::NotCoprime(a.unsigned_abs(), r * s));
    }
    Ok(())
}

/// `(1/U) Σ_{u ∈ (U,2U] square-free, (u,ars)=1} |Δ^ψ(X; rsu, a)|` against 𝓛.
pub fn avg_delta_squarefree(
    r: u64,
    s: u64,
    u: f64,
    table: &SmoothTable,
    a: i64,
    eps: f64,
) -> Result<AverageReport> {
    check_rs(r, s, a)?;
    let ars = a.unsigned_abs() * r * s;
    let lo = if u < 0.0 { 1 } else { u.floor() as u64 + 1 };
    let hi = if u <= 0.0 { 0 } else { (2.0 * u).floor() as u64 };
    let us: Vec<u64> = (lo..=hi)
        .filter(|&v| is_squarefree(v) && gcd(v, ars) == 1)
        .collect();
    let terms = us
        .par_iter()
        .map(|&v| Ok((v, r * s * v, table.delta(r * s * v, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = terms.iter().map(|t| t.2.abs()).collect::<Neumaier>().value();
    let lhs = if terms.is_empty() { 0.0 } else { total / u };
    let rhs = bound_l(r as f64, s as f64, u, table.x());
    Ok(AverageReport {
        r,
        s,
        u,
        x: table.x(),
        a,
        lhs,
        rhs,
        ratio: lhs / rhs,
        terms,
        range: range_check(r as f64, s as f64, u, table.x(), eps),
    })
}

/// `U^{−1/2} Σ_{u square-free, u² ∈ (U,2U], (u,ars)=1} |Δ^ψ(X; rsu², a)|` against 𝓜.
pub fn avg_delta_squares(
    r: u64,
    s: u64,
    u: f64,
    table: &SmoothTable,
    a: i64,
    eps: f64,
) -> Result<AverageReport> {
    check_rs(r, s, a)?;
    let ars = a.unsigned_abs() * r * s;
    let top = if u <= 0.0 { 0 } else { (2.0 * u).sqrt().floor() as u64 + 1 };
    let us: Vec<u64> = (1..=top)
        .filter(|&v| {
            let sq = (v * v) as f64;
            sq > u && sq <= 2.0 * u && is_squarefree(v) && gcd(v, ars) == 1
        })
        .collect();
    let terms = us
        .par_iter()
        .map(|&v| Ok((v, r * s * v * v, table.delta(r * s * v * v, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = terms.iter().map(|t| t.2.abs()).collect::<Neumaier>().value();
    let lhs = if terms.is_empty() { 0.0 } else { total / u.sqrt() };
    let rhs = bound_m(r as f64, s as f64, u, table.x());
    Ok(AverageReport {
        r,
        s,
        u,
        x: table.x(),
        a,
        lhs,
        rhs,
        ratio: lhs / rhs,
        terms,
        range: range_check(r as f64, s as f64, u, table.x(), eps),
    })
}

/// `max_a |Δ(X; q, a)| / (q^{1/2} + X^{1/3})` for each modulus.
pub fn hooley_envelope(table: &DeltaTable, moduli: &[u64]) -> Vec<(u64, f64)> {
    moduli
        .par_iter()
        .map(|&q| {
            let m = table
                .all_units(q)
                .iter()
                .map(|r| r.delta.abs())
                .fold(0.0, f64::max);
            (q, m / ((q as f64).sqrt() + table.x.cbrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::divisor_count;
    use crate::weight::{make_weight, WeightSpec};

    #[test]
    fn examples() {
        let r = delta(20.0, 3, 1).unwrap();
        assert_eq!((r.ap_sum, r.coprime_sum, r.phi), (19, 41, 2));
        assert_eq!(r.delta_exact, Ratio::new(-3, 2));
        assert_eq!(r.delta, -1.5);
        let r = delta(20.0, 3, 2).unwrap();
        assert_eq!(r.ap_sum, 22);
        assert_eq!(r.delta, 1.5);
        for x in [1.0, 7.5, 100.0] {
            assert_eq!(delta(x, 1, 1).unwrap().delta, 0.0);
        }
        assert_eq!(delta(20.0, 6, 2).unwrap_err(), Error::NotCoprime(2, 6));
        assert_eq!(r.exact_string(), "3/2");
    }

    #[test]
    fn hand_enumeration_oracle() {
        // n ≡ 1 (3), n ≤ 20: 1 4 7 10 13 16 19
        let ap: u64 = [1u64, 4, 7, 10, 13, 16, 19].iter().map(|&n| divisor_count(n)).sum();
        assert_eq!(ap, 19);
        let cop: u64 = (1..=20u64).filter(|n| n % 3 != 0).map(divisor_count).sum();
        assert_eq!(cop, 41);
    }

    #[test]
    fn partition_identity_small() {
        let t = DeltaTable::new(1000.0).unwrap();
        for q in 1..=60 {
            assert_eq!(partition_sum(&t.all_units(q)), Ratio::from_integer(0));
        }
    }

    #[test]
    fn trial_division_oracle() {
        let x = 2000.0;
        let t = DeltaTable::new(x).unwrap();
        for q in [1u64, 2, 7, 12, 30, 97, 100] {
            for a in (1..q.max(2) as i64).filter(|&a| gcd_signed(a, q) == 1).take(5) {
                let ap: u64 = (1..=2000u64).filter(|n| n % q == reduce(a, q)).map(divisor_count).sum();
                let cop: u64 = (1..=2000u64).filter(|&n| gcd(n, q) == 1).map(divisor_count).sum();
                let want = Ratio::new(euler_phi(q) as i128 * ap as i128 - cop as i128, euler_phi(q) as i128);
                assert_eq!(t.record(q, a).unwrap().delta_exact, want);
                assert_eq!(delta(x, q, a).unwrap().delta_exact, want);
            }
        }
    }

    #[test]
    fn many_moduli_agree_with_single() {
        let moduli: Vec<u64> = (90..130).collect();
        let many = delta_many_with(5000.0, &moduli, 7, DivisorSieve::new().with_block(333)).unwrap();
        for (q, rec) in moduli.iter().zip(&many) {
            match rec {
                None => assert!(gcd(7, *q) != 1),
                Some(r) => assert_eq!(r.delta_exact, delta(5000.0, *q, 7).unwrap().delta_exact),
            }
        }
    }

    #[test]
    fn smooth_examples() {
        let w = make_weight(WeightSpec::bump(0.5)).unwrap();
        assert_eq!(delta_smooth(100.0, 1, 1, &w).unwrap(), 0.0);
        let direct: f64 = (101..200u64)
            .map(|n| {
                let base = w.eval(n as f64 / 100.0) * divisor_count(n) as f64;
                let ind = if n % 7 == 1 { 1.0 } else { 0.0 };
                let cop = if n % 7 != 0 { 1.0 / 6.0 } else { 0.0 };
                base * (ind - cop)
            })
            .sum();
        let v = delta_smooth(100.0, 7, 1, &w).unwrap();
        assert!((v - direct).abs() < 1e-10);
        let table = SmoothTable::new(100.0, &w).unwrap();
        assert!((table.delta(7, 1).unwrap() - v).abs() < 1e-10);
        let total: f64 = (1..12).map(|a| delta_smooth(100.0, 12, a, &w).unwrap_or(0.0)).sum();
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn smooth_table_matches_direct() {
        let w = make_weight(WeightSpec::bump(0.25)).unwrap();
        let table = SmoothTable::new(3000.0, &w).unwrap();
        for q in [5u64, 12, 35, 210, 221] {
            for a in [1i64, 11, 13] {
                if gcd_signed(a, q) != 1 {
                    continue;
                }
                let d = delta_smooth(3000.0, q, a, &w).unwrap();
                assert!((table.delta(q, a).unwrap() - d).abs() < 1e-8 * (1.0 + d.abs()));
            }
        }
    }

    #[test]
    fn range_examples() {
        let x = 1e6;
        let rep = range_check(1.0, 1.0, 1.0, x, 0.1);
        assert!(!rep.conditions[2]);
        let rep = range_check(x.powf(0.2), 1.0, x.powf(0.1), x, 0.05);
        assert!(rep.all());
        assert!(range_check(1.0, 1.0, 2.0, x, 0.0).degenerate);
    }

    #[test]
    fn averages() {
        let w = make_weight(WeightSpec::bump(0.5)).unwrap();
        let t = SmoothTable::new(1000.0, &w).unwrap();
        let empty = avg_delta_squarefree(1, 1, 0.5, &t, 1, 0.01).unwrap();
        assert_eq!(empty.lhs, 0.0);

        let rep = avg_delta_squarefree(2, 3, 5.0, &t, 1, 0.01).unwrap();
        assert_eq!(rep.terms.iter().map(|t| t.0).collect::<Vec<_>>(), vec![7]);
        let want = delta_smooth(1000.0, 42, 1, &w).unwrap().abs() / 5.0;
        assert!((rep.lhs - want).abs() < 1e-9);

        let sq = avg_delta_squares(1, 1, 20.0, &t, 1, 0.01).unwrap();
        assert_eq!(sq.terms.iter().map(|t| t.0).collect::<Vec<_>>(), vec![5, 6]);
        let want = (delta_smooth(1000.0, 25, 1, &w).unwrap().abs()
            + delta_smooth(1000.0, 36, 1, &w).unwrap().abs())
            / 20f64.sqrt();
        assert!((sq.lhs - want).abs() < 1e-9);
        // u² ∈ (10, 20]: only u = 4, not square-free
        assert!(avg_delta_squares(1, 1, 10.0, &t, 1, 0.01).unwrap().terms.is_empty());
        assert!(avg_delta_squarefree(1, 8, 5.0, &t, 1, 0.01).is_err());
    }
}
