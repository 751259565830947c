//! Desk-scale experiments: equidistribution for almost all moduli, and the
//! divisor sum of the binary cubic form `n₁n₂² + 1`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::arith::{euler_phi, gcd, gcd_signed, mod_inv};
use crate::discrepancy::delta_many;
use crate::error::{param, Error, Result};
use crate::primes::factorize;
use crate::sieve::isqrt;

/// Largest `X` accepted by [`ap_equidistribution_run`].
pub const AP_RUN_BUDGET: f64 = 1e8;

/// Largest interval `(Q, 2Q]` enumerated by [`good_moduli`].
pub const GOOD_MODULI_BUDGET: f64 = 1e6;

/// Largest `X` for [`binary_cubic_sum`] (sieve path).
pub const CUBIC_BUDGET: u64 = 5_000;

/// `ζ(2)`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// The four windows `(P₁, Q₁, P₂, Q₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl Windows {
    /// `(X^{10ε}, X^{√ε/2}, X^{2√ε}, X^{1/12})`.
    pub fn from_eps(x: f64, eps: f64) -> Self {
        let r = eps.sqrt();
        Self {
            p1: x.powf(10.0 * eps),
            q1: x.powf(r / 2.0),
            p2: x.powf(2.0 * r),
            q2: x.powf(1.0 / 12.0),
        }
    }

    pub fn sqrt(&self) -> Self {
        Self {
            p1: self.p1.sqrt(),
            q1: self.q1.sqrt(),
            p2: self.p2.sqrt(),
            q2: self.q2.sqrt(),
        }
    }

    pub fn degenerate(&self) -> bool {
        self.p1 >= self.q1 || self.p2 >= self.q2
    }

    /// `(p₁, p₂, k)` with `n = p₁p₂k`, `p_i` prime in their windows and
    /// `gcd(k, p₁p₂) = 1`, if one exists.
    pub fn witness(&self, n: u64) -> Result<Option<(u64, u64, u64)>> {
        if self.degenerate() {
            return Ok(None);
        }
        let f = factorize(n)?;
        let in1 = |p: u64| (p as f64) > self.p1 && (p as f64) <= self.q1;
        let in2 = |p: u64| (p as f64) > self.p2 && (p as f64) <= self.q2;
        for &(p1, _) in f.pairs().iter().filter(|&&(p, _)| in1(p)) {
            for &(p2, _) in f.pairs().iter().filter(|&&(p, _)| in2(p)) {
                let m = p1 * p2;
                if n % m == 0 && gcd(n / m, m) == 1 {
                    return Ok(Some((p1, p2, n / m)));
                }
            }
        }
        Ok(None)
    }

    /// Recheck a witness from a fresh factorization of `n`.
    pub fn verify(&self, n: u64, w: (u64, u64, u64)) -> Result<bool> {
        let (p1, p2, k) = w;
        let f1 = factorize(p1)?;
        let f2 = factorize(p2)?;
        let fk = factorize(k)?;
        let prime = |f: &crate::primes::Factorization| f.pairs().len() == 1 && f.pairs()[0].1 == 1;
        Ok(prime(&f1)
            && prime(&f2)
            && (p1 as f64) > self.p1
            && (p1 as f64) <= self.q1
            && (p2 as f64) > self.p2
            && (p2 as f64) <= self.q2
            && fk.primes().all(|p| p != p1 && p != p2)
            && p1.checked_mul(p2).and_then(|m| m.checked_mul(k)) == Some(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodModuliParams {
    pub x: f64,
    pub q: f64,
    pub eps: f64,
    pub windows: Windows,
}

impl GoodModuliParams {
    pub fn new(x: f64, q: f64, eps: f64) -> Self {
        Self {
            x,
            q,
            eps,
            windows: Windows::from_eps(x, eps),
        }
    }

    /// Explicit windows, for exercising non-degenerate sets at small `X`.
    pub fn with_windows(x: f64, q: f64, eps: f64, windows: Windows) -> Self {
        Self { x, q, eps, windows }
    }

    /// `ε ∈ (log log X / log X, 1/1000)`.
    pub fn eps_in_window(&self) -> bool {
        let l = self.x.ln();
        self.eps > l.ln() / l && self.eps < 1e-3
    }

    /// Integers in `(Q, 2Q]`.
    pub fn interval(&self) -> (u64, u64) {
        let lo = self.q.floor() as u64 + 1;
        let hi = (2.0 * self.q).floor() as u64;
        (lo, hi)
    }

    fn check(&self) -> Result<()> {
        if !(self.q >= 1.0 && self.q <= GOOD_MODULI_BUDGET) {
            return param("Q", format!("{} outside [1, {GOOD_MODULI_BUDGET}]", self.q));
        }
        if !(self.x > 1.0) {
            return param("X", format!("{} must exceed 1", self.x));
        }
        if !(self.eps > 0.0) {
            return param("eps", format!("{} must be positive", self.eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodModuli {
    pub params: GoodModuliParams,
    /// `(q, (p₁, p₂, k))`, increasing in `q`.
    pub members: Vec<(u64, (u64, u64, u64))>,
    pub interval_count: u64,
    pub degenerate: bool,
    pub eps_in_window: bool,
}

/// Every `q ∈ (Q, 2Q]` of the form `p₁p₂k` with `p_i` in their windows.
pub fn good_moduli(params: &GoodModuliParams) -> Result<GoodModuli> {
    params.check()?;
    let (lo, hi) = params.interval();
    let degenerate = params.windows.degenerate();
    let members = if degenerate || lo > hi {
        Vec::new()
    } else {
        let found: Vec<Option<(u64, (u64, u64, u64))>> = (lo..=hi)
            .into_par_iter()
            .map(|q| Ok(params.windows.witness(q)?.map(|w| (q, w))))
            .collect::<Result<_>>()?;
        found.into_iter().flatten().collect()
    };
    Ok(GoodModuli {
        params: *params,
        members,
        interval_count: hi.saturating_sub(lo) + u64::from(hi >= lo),
        degenerate,
        eps_in_window: params.eps_in_window(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalReport {
    pub bad_count: u64,
    pub interval_count: u64,
    /// `Q (log P₁/log Q₁ + log P₂/log Q₂ + 1/P₁ + 1/P₂)`.
    pub sieve_rhs: f64,
    pub ratio: f64,
    /// `bad_count / (√ε Q)`.
    pub sqrt_eps_constant: f64,
    pub degenerate: bool,
}

pub fn sieve_rhs(q: f64, w: &Windows) -> f64 {
    q * (w.p1.ln() / w.q1.ln() + w.p2.ln() / w.q2.ln() + 1.0 / w.p1 + 1.0 / w.p2)
}

pub fn exceptional_fraction(params: &GoodModuliParams) -> Result<ExceptionalReport> {
    let set = good_moduli(params)?;
    Ok(exceptional_from(&set))
}

pub fn exceptional_from(set: &GoodModuli) -> ExceptionalReport {
    let bad = set.interval_count - set.members.len() as u64;
    let rhs = sieve_rhs(set.params.q, &set.params.windows);
    ExceptionalReport {
        bad_count: bad,
        interval_count: set.interval_count,
        sieve_rhs: rhs,
        ratio: bad as f64 / rhs,
        sqrt_eps_constant: bad as f64 / (set.params.eps.sqrt() * set.params.q),
        degenerate: set.degenerate,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApRow {
    pub q: u64,
    pub delta: f64,
    pub delta_exact: String,
    /// `X^{1−ε} (log X)^B / q`.
    pub threshold: f64,
    pub violates: bool,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApRunReport {
    pub x: f64,
    pub q: f64,
    pub a: i64,
    pub eps: f64,
    pub b: f64,
    pub rows: Vec<ApRow>,
    /// Moduli skipped because `gcd(a, q) > 1`.
    pub skipped: u64,
    pub violators: u64,
    pub violators_good: u64,
    pub violators_bad: u64,
    pub sqrt_eps_q: f64,
    pub degenerate: bool,
}

/// `Δ(X; q, a)` for every `q ∈ (Q, 2Q]` with `gcd(a, q) = 1`, counted
/// against the threshold `X^{1−ε}(log X)^B/q` and split by membership in
/// the good set.
pub fn ap_equidistribution_run(x: f64, q: f64, a: i64, eps: f64, b: f64) -> Result<ApRunReport> {
    if x > AP_RUN_BUDGET {
        return Err(Error::RangeTooLarge {
            len: x as u64,
            budget: AP_RUN_BUDGET as u64,
        });
    }
    let params = GoodModuliParams::new(x, q, eps);
    let good = good_moduli(&params)?;
    let (lo, hi) = params.interval();
    let moduli: Vec<u64> = (lo..=hi).collect();
    let records = delta_many(x, &moduli, a)?;
    let good_set: std::collections::HashSet<u64> = good.members.iter().map(|m| m.0).collect();
    let scale = x.powf(1.0 - eps) * x.ln().powf(b);
    let mut rows = Vec::with_capacity(moduli.len());
    let mut skipped = 0;
    for (q, rec) in moduli.iter().zip(records) {
        let Some(rec) = rec else {
            skipped += 1;
            continue;
        };
        let threshold = scale / *q as f64;
        rows.push(ApRow {
            q: *q,
            delta: rec.delta,
            delta_exact: rec.exact_string(),
            threshold,
            violates: rec.delta.abs() > threshold,
            good: good_set.contains(q),
        });
    }
    let violators = rows.iter().filter(|r| r.violates).count() as u64;
    let violators_good = rows.iter().filter(|r| r.violates && r.good).count() as u64;
    Ok(ApRunReport {
        x,
        q,
        a,
        eps,
        b,
        rows,
        skipped,
        violators,
        violators_good,
        violators_bad: violators - violators_good,
        sqrt_eps_q: eps.sqrt() * q,
        degenerate: good.degenerate,
    })
}

/// Divisor counts of `n₁n₂² + 1` for `n₁, n₂ ≤ X`, indexed `[n₂ − 1][n₁ − 1]`.
///
/// For each `n₂`, every `e ≤ √(Xn₂² + 1)` coprime to `n₂` divides exactly
/// the progression `n₁ ≡ −n̄₂² (mod e)`; pairs `(e, m/e)` with `e < m/e`
/// count twice and `e² = m` once.
pub fn cubic_grid_sieve(x: u64) -> Result<Vec<Vec<u32>>> {
    if x > CUBIC_BUDGET {
        return Err(Error::TooLarge {
            value: x,
            bound: CUBIC_BUDGET,
        });
    }
    Ok((1..=x)
        .into_par_iter()
        .map(|n2| {
            let sq = n2 * n2;
            let mut counts = vec![0u32; x as usize];
            let top = isqrt(x * sq + 1);
            for e in 1..=top {
                if gcd(e, n2) != 1 {
                    continue;
                }
                let inv = mod_inv((sq % e) as i64, e).expect("coprime");
                let r0 = (e - inv % e) % e;
                let mut n1 = if r0 == 0 { e } else { r0 };
                while n1 <= x {
                    let m = n1 * sq + 1;
                    let ee = e * e;
                    if ee < m {
                        counts[n1 as usize - 1] += 2;
                    } else if ee == m {
                        counts[n1 as usize - 1] += 1;
                    }
                    n1 += e;
                }
            }
            counts
        })
        .collect())
}

/// The same grid by factorizing every value.
pub fn cubic_grid_factor(x: u64) -> Result<Vec<Vec<u32>>> {
    (1..=x)
        .into_par_iter()
        .map(|n2| {
            (1..=x)
                .map(|n1| Ok(factorize(n1 * n2 * n2 + 1)?.divisor_count() as u32))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicExperiment {
    pub x: u64,
    pub lhs: u64,
    /// Path (ii) total when it was run.
    pub oracle: Option<u64>,
    /// `(3/ζ(2)) X² log X`.
    pub main_term: f64,
    pub ratio: f64,
    /// `Σ_{n₂ ∈ 𝒩}` and `Σ_{n₂ ∉ 𝒩}` of the inner sums.
    pub split: (u64, u64),
    pub eps: f64,
    pub degenerate: bool,
}

/// Default multiplier in `ε = A log log X / log X`.
pub const DEFAULT_A: f64 = 10.0;

/// Largest `X` for which the factorization path runs by default.
pub const CUBIC_ORACLE_LIMIT: u64 = 300;

/// `Σ_{n₁,n₂ ≤ X} d(n₁n₂² + 1)` by the progression sieve, cross-checked by
/// factorization when `X ≤ oracle_limit`.
pub fn binary_cubic_sum(x: u64, a_param: f64, oracle_limit: u64) -> Result<CubicExperiment> {
    if x == 0 {
        return Err(Error::Zero("X"));
    }
    let grid = cubic_grid_sieve(x)?;
    let rows: Vec<u64> = grid.iter().map(|r| r.iter().map(|&d| d as u64).sum()).collect();
    let lhs: u64 = rows.iter().sum();
    let oracle = if x <= oracle_limit {
        let g = cubic_grid_factor(x)?;
        Some(g.iter().flatten().map(|&d| d as u64).sum())
    } else {
        None
    };
    let eps = default_eps(x as f64, a_param);
    let n_set = good_n2_set(x, eps)?;
    let inside: u64 = n_set.members.iter().map(|&(n, _)| rows[n as usize - 1]).sum();
    let main_term = cubic_main_term(x).closed;
    Ok(CubicExperiment {
        x,
        lhs,
        oracle,
        main_term,
        ratio: lhs as f64 / main_term,
        split: (inside, lhs - inside),
        eps,
        degenerate: n_set.degenerate,
    })
}

/// `A log log X / log X`, or `A` itself when `log log X ≤ 0`.
pub fn default_eps(x: f64, a_param: f64) -> f64 {
    let l = x.ln();
    if l <= 1.0 {
        a_param
    } else {
        a_param * l.ln() / l
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainTerm {
    /// `X Σ_{n₂ ≤ X} (φ(n₂)/n₂) log(X n₂²)`.
    pub direct: f64,
    /// `(3/ζ(2)) X² log X`.
    pub closed: f64,
}

impl MainTerm {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.closed).abs() / self.closed
    }
}

pub fn cubic_main_term(x: u64) -> MainTerm {
    let xf = x as f64;
    let direct: f64 = (1..=x)
        .map(|n| euler_phi(n) as f64 / n as f64 * (xf * (n as f64) * (n as f64)).ln())
        .collect::<crate::sum::Neumaier>()
        .value()
        * xf;
    MainTerm {
        direct,
        closed: 3.0 / ZETA2 * xf * xf * xf.ln(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodN2 {
    pub x: u64,
    pub eps: f64,
    pub windows: Windows,
    pub members: Vec<(u64, (u64, u64, u64))>,
    pub degenerate: bool,
}

impl GoodN2 {
    /// `1 − |𝒩|/X`.
    pub fn complement_density(&self) -> f64 {
        1.0 - self.members.len() as f64 / self.x as f64
    }
}

/// `𝒩 = {p₁p₂k ≤ X : p₁ ∈ (P₁^{1/2}, Q₁^{1/2}], p₂ ∈ (P₂^{1/2}, Q₂^{1/2}], gcd(k, p₁p₂) = 1}`.
pub fn good_n2_set(x: u64, eps: f64) -> Result<GoodN2> {
    good_n2_set_with(x, eps, Windows::from_eps(x as f64, eps).sqrt())
}

pub fn good_n2_set_with(x: u64, eps: f64, windows: Windows) -> Result<GoodN2> {
    let degenerate = windows.degenerate();
    let members = if degenerate {
        Vec::new()
    } else {
        let found: Vec<Option<(u64, (u64, u64, u64))>> = (1..=x)
            .into_par_iter()
            .map(|n| Ok(windows.witness(n)?.map(|w| (n, w))))
            .collect::<Result<_>>()?;
        found.into_iter().flatten().collect()
    };
    Ok(GoodN2 {
        x,
        eps,
        windows,
        members,
        degenerate,
    })
}

/// `|Δ(X; q, a)|` for a prime `q > X`: the progression holds at most one `n`.
pub fn large_prime_delta(x: f64, q: u64, a: i64) -> Result<(f64, u64)> {
    if gcd_signed(a, q) != 1 {
        return Err(Error::NotCoprime(a.unsigned_abs(), q));
    }
    let rec = crate::discrepancy::delta(x, q, a)?;
    Ok((rec.delta, rec.ap_sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_at_desk_scale() {
        let w = Windows::from_eps(1e6, 0.012);
        assert!((w.p1 - 1e6f64.powf(0.12)).abs() < 1e-9);
        assert!(w.degenerate());
        let set = good_moduli(&GoodModuliParams::new(1e6, 1e4, 0.012)).unwrap();
        assert!(set.degenerate && set.members.is_empty());
        assert!(!set.eps_in_window);
        let rep = exceptional_from(&set);
        assert_eq!(rep.bad_count, rep.interval_count);
        assert_eq!(rep.interval_count, 10_000);
    }

    #[test]
    fn explicit_windows_and_refactorization() {
        let w = Windows {
            p1: 2.0,
            q1: 7.0,
            p2: 10.0,
            q2: 40.0,
        };
        let params = GoodModuliParams::with_windows(1e6, 500.0, 0.01, w);
        let set = good_moduli(&params).unwrap();
        assert!(!set.degenerate);
        assert!(!set.members.is_empty());
        for &(q, wit) in &set.members {
            assert!(w.verify(q, wit).unwrap());
        }
        // brute-force membership over all (p₁, p₂, k)
        let primes = crate::primes::primes_up_to(40);
        for q in 501..=1000u64 {
            let brute = primes.iter().any(|&p1| {
                (p1 as f64) > w.p1
                    && (p1 as f64) <= w.q1
                    && primes.iter().any(|&p2| {
                        (p2 as f64) > w.p2
                            && (p2 as f64) <= w.q2
                            && q % (p1 * p2) == 0
                            && gcd(q / (p1 * p2), p1 * p2) == 1
                    })
            });
            assert_eq!(brute, set.members.iter().any(|m| m.0 == q), "q={q}");
        }
        // 3·11·k with 3 | k fails; 2 is outside (2, 7]
        assert!(w.witness(9 * 11).unwrap().is_none());
        assert!(w.witness(2 * 11).unwrap().is_none());
        assert_eq!(w.witness(3 * 11).unwrap(), Some((3, 11, 1)));
        assert!(w.verify(66, (3, 11, 2)).unwrap());
        assert!(!w.verify(99, (3, 11, 3)).unwrap());
    }

    #[test]
    fn sieve_rhs_scaling_is_recorded() {
        let a = sieve_rhs(1e4, &Windows::from_eps(1e40, 0.001));
        let b = sieve_rhs(1e4, &Windows::from_eps(1e40, 0.004));
        assert!(b > a);
    }

    #[test]
    fn ap_run_examples() {
        let rep = ap_equidistribution_run(1e5, 300.0, 1, 0.012, 50.0).unwrap();
        assert_eq!(rep.violators, 0);
        assert_eq!(rep.rows.len() as u64 + rep.skipped, 300);
        let rep = ap_equidistribution_run(2e4, 50.0, 2, 0.012, 0.0).unwrap();
        assert_eq!(rep.skipped, 25);
        for row in &rep.rows {
            let d = crate::discrepancy::delta(2e4, row.q, 2).unwrap();
            assert_eq!(row.delta, d.delta);
        }
    }

    #[test]
    fn large_prime_modulus() {
        // q = 10007 > X = 5000: at most one n ≡ a
        let (d, ap) = large_prime_delta(5000.0, 10_007, 1234).unwrap();
        assert_eq!(ap, crate::arith::divisor_count(1234));
        assert!(d.abs() <= ap as f64 + 1.0);
    }

    #[test]
    fn cubic_examples() {
        assert_eq!(binary_cubic_sum(1, DEFAULT_A, 10).unwrap().lhs, 2);
        let two = binary_cubic_sum(2, DEFAULT_A, 10).unwrap();
        assert_eq!(two.lhs, 9);
        assert_eq!(two.oracle, Some(9));
        let t = binary_cubic_sum(30, DEFAULT_A, 30).unwrap();
        assert_eq!(Some(t.lhs), t.oracle);
        assert_eq!(t.split.0 + t.split.1, t.lhs);
    }

    #[test]
    fn cubic_grids_agree() {
        assert_eq!(cubic_grid_sieve(60).unwrap(), cubic_grid_factor(60).unwrap());
    }

    #[test]
    fn main_term_examples() {
        assert!((ZETA2 - 1.644_934).abs() < 1e-6);
        let m = cubic_main_term(2);
        let want = 2.0 * (2f64.ln() + 0.5 * 8f64.ln());
        assert!((m.direct - want).abs() < 1e-12);
    }

    #[test]
    fn n2_set() {
        let g = good_n2_set(10_000, 0.012).unwrap();
        assert!(g.degenerate && g.members.is_empty());
        let w = Windows {
            p1: 1.5,
            q1: 5.0,
            p2: 6.0,
            q2: 20.0,
        };
        let g = good_n2_set_with(2000, 0.01, w).unwrap();
        assert!(!g.members.is_empty());
        for &(n, wit) in &g.members {
            assert!(w.verify(n, wit).unwrap());
        }
        assert!(g.complement_density() > 0.0 && g.complement_density() < 1.0);
    }
}
