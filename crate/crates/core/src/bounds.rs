//! Closed-form right-hand sides of the bounds being tested.
//!
//! Implied constants, `d(·)^{O(1)}` and `log^{O(1)}` factors are all set to 1;
//! callers report them separately where relevant.

use crate::arith::{gcd, gcd_signed};
use crate::error::{Error, Result};
use crate::primes::{factorize, Factorization};

/// `s^{1/8}U^{1/4}X^{1/4} + r^{1/4}X^{1/4} + (rs)^{1/2} + r^{1/2}s^{3/8}U^{1/4}`.
pub fn bound_l(r: f64, s: f64, u: f64, x: f64) -> f64 {
    s.powf(0.125) * u.powf(0.25) * x.powf(0.25)
        + r.powf(0.25) * x.powf(0.25)
        + (r * s).sqrt()
        + r.sqrt() * s.powf(0.375) * u.powf(0.25)
}

/// `s^{1/8}U^{1/4}X^{1/4} + r^{1/4}X^{1/4} + (rs)^{1/2}U^{1/4} + r^{1/2}s^{3/8}U^{1/4}`,
/// with the `U^{o(1)}` factor of the last term taken as 1.
pub fn bound_m(r: f64, s: f64, u: f64, x: f64) -> f64 {
    s.powf(0.125) * u.powf(0.25) * x.powf(0.25)
        + r.powf(0.25) * x.powf(0.25)
        + (r * s).sqrt() * u.powf(0.25)
        + r.sqrt() * s.powf(0.375) * u.powf(0.25)
}

/// `gcd(v, p)^e` over the prime powers `p^k ‖ n`, as `Π gcd(v, p)^{k·e}`.
fn gcd_power_product(f: &Factorization, v: i64, e: f64) -> f64 {
    f.pairs()
        .iter()
        .map(|&(p, k)| (gcd_signed(v, p) as f64).powf(k as f64 * e))
        .product()
}

fn square_difference(u1: u64, u2: u64) -> i64 {
    (u1 as i128 * u1 as i128 - u2 as i128 * u2 as i128).clamp(i64::MIN as i128, i64::MAX as i128)
        as i64
}

/// The completion bound factor
///
/// ```text
/// 1 + N/(su₁u₂) · Π_{p^k‖u₁u₂} gcd(b₁−b₂,p)^{k/2}
///               · Π_{p^k‖s} (gcd(u₁²−u₂²,p)^{k/2} + gcd(b₁−b₂,p)^{k/2})
/// ```
pub fn bound_p(s: u64, u1: u64, u2: u64, b1: i64, b2: i64, n: f64) -> Result<f64> {
    let db = b1 - b2;
    let fu = factorize(u1 * u2)?;
    let fs = factorize(s)?;
    let du = square_difference(u1, u2);
    let over_u = gcd_power_product(&fu, db, 0.5);
    let over_s: f64 = fs
        .pairs()
        .iter()
        .map(|&(p, k)| {
            let e = k as f64 / 2.0;
            (gcd_signed(du, p) as f64).powf(e) + (gcd_signed(db, p) as f64).powf(e)
        })
        .product();
    Ok(1.0 + n / (s as f64 * u1 as f64 * u2 as f64) * over_u * over_s)
}

/// `(su₁u₂)^{1/2} · 𝓟`.
pub fn poisson_rhs(s: u64, u1: u64, u2: u64, b1: i64, b2: i64, n: f64) -> Result<f64> {
    Ok((s as f64 * u1 as f64 * u2 as f64).sqrt() * bound_p(s, u1, u2, b1, b2, n)?)
}

/// ```text
/// (cN)^{1/2} ((su₁u₂)^{1/4} (1 + N·Π_{p^k‖s} gcd(u₁²−u₂²,p)^{k/2} / (su₁u₂))^{1/2} + r^{1/2})
/// ```
pub fn qvdc_rhs(r: u64, s: u64, u1: u64, u2: u64, c: u64, n: f64) -> Result<f64> {
    let m = s as f64 * u1 as f64 * u2 as f64;
    let g = gcd_power_product(&factorize(s)?, square_difference(u1, u2), 0.5);
    Ok((c as f64 * n).sqrt() * (m.powf(0.25) * (1.0 + n * g / m).sqrt() + (r as f64).sqrt()))
}

/// Both readings of the bilinear bound factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KBound {
    /// Second term with `|γ̃_{u₀v₁} γ̃_{u₀v₂}|`.
    pub paired: f64,
    /// Second term with `|γ̃_{u₀v₁}|²`, the literal subscripts.
    pub diagonal: f64,
}

/// Whether `gcd(u₁/u₀, u₀) = 1` for all `u₁, u₂` in `support`, `u₀ = gcd(u₁, u₂)`.
pub fn support_condition_holds(support: &[u64]) -> bool {
    support.iter().all(|&u1| {
        support.iter().all(|&u2| {
            let u0 = gcd(u1, u2);
            gcd(u1 / u0, u0) == 1
        })
    })
}

/// ```text
/// N^{1/4} ‖γ̃‖₁ (s^{1/8}U^{1/4} + r^{1/4})
///   + N^{1/2} (Σ_{u₀} Σ_{v₁,v₂} |γ̃ γ̃| Π_{p^k‖su₀} gcd(v₁²−v₂²,p)^{k/4} / (su₀v₁v₂)^{1/4})^{1/2}
/// ```
///
/// `gamma` lists `(u, γ̃_u)` over the support; each ordered pair `(u₁, u₂)`
/// contributes with `u₀ = gcd(u₁, u₂)`, `v_i = u_i / u₀`.
pub fn bound_k(r: u64, s: u64, u: f64, n: f64, gamma: &[(u64, f64)]) -> Result<KBound> {
    let support: Vec<u64> = gamma.iter().map(|&(u, _)| u).collect();
    if !support_condition_holds(&support) {
        return Err(Error::Shape(
            "support violates gcd(u1/u0, u0) = 1".to_string(),
        ));
    }
    let l1: f64 = gamma.iter().map(|&(_, g)| g.abs()).sum();
    let first = n.powf(0.25) * l1 * ((s as f64).powf(0.125) * u.powf(0.25) + (r as f64).powf(0.25));
    let fs = factorize(s)?;
    let mut paired = crate::sum::Neumaier::new();
    let mut diagonal = crate::sum::Neumaier::new();
    for &(u1, g1) in gamma {
        for &(u2, g2) in gamma {
            let u0 = gcd(u1, u2);
            let (v1, v2) = (u1 / u0, u2 / u0);
            let dv = square_difference(v1, v2);
            let num = gcd_power_product(&fs, dv, 0.25) * gcd_power_product(&factorize(u0)?, dv, 0.25);
            let den = (s as f64 * u0 as f64 * v1 as f64 * v2 as f64).powf(0.25);
            paired.add((g1 * g2).abs() * num / den);
            diagonal.add(g1 * g1 * num / den);
        }
    }
    Ok(KBound {
        paired: first + n.sqrt() * paired.value().sqrt(),
        diagonal: first + n.sqrt() * diagonal.value().sqrt(),
    })
}

/// `‖λ^{(c)}‖₂` with `λ^{(c)}_n = λ_n c^{1/4} 𝟙_{c|n}` over `1 ≤ n ≤ N`;
/// `lambda[i]` holds `λ_{i+1}`.
pub fn lambda_c_norm(lambda: &[f64], c: u64) -> f64 {
    let sq: f64 = lambda
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as u64 + 1) % c == 0)
        .map(|(_, l)| l * l)
        .sum();
    (c as f64).powf(0.25) * sq.sqrt()
}

/// `Σ_{c|r} ‖λ^{(c)}‖₂`.
pub fn lambda_norm_sum(lambda: &[f64], r: u64) -> f64 {
    crate::arith::divisors(r)
        .into_iter()
        .map(|c| lambda_c_norm(lambda, c))
        .sum()
}
