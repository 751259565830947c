//! Modular arithmetic kernels.
//!
//! Everything works on `u64` moduli with 128-bit intermediates, so products
//! of two residues never overflow.

use crate::error::{Error, Result};
use crate::primes::{factorize, is_prime};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(a, b, c)` with the convention `gcd(0, n) = n`.
pub fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    gcd(gcd(a, b), c)
}

/// gcd of a signed integer with a modulus.
pub fn gcd_signed(a: i64, m: u64) -> u64 {
    gcd(a.unsigned_abs(), m)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Reduce a signed 128-bit integer into `[0, m)`.
#[inline]
pub fn reduce_wide(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m` in `[0, m)`, by the extended Euclidean algorithm.
pub fn mod_inv(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::Zero("m"));
    }
    if m == 1 {
        return Ok(0);
    }
    inv_residue(reduce(a, m), m).ok_or(Error::NoInverse { a, m })
}

/// Inverse of a residue `a ∈ [0, m)`, or `None` when `gcd(a, m) > 1`.
pub(crate) fn inv_residue(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .expect("n >= 1")
        .pairs()
        .iter()
        .fold(1u64, |acc, &(p, k)| acc * (p - 1) * p.pow(k - 1))
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).expect("n >= 1").pairs().iter().all(|&(_, k)| k == 1)
}

pub fn is_cubefree(n: u64) -> bool {
    n != 0 && factorize(n).expect("n >= 1").pairs().iter().all(|&(_, k)| k <= 2)
}

/// Möbius function.
pub fn mobius(n: u64) -> i32 {
    let f = factorize(n).expect("n >= 1");
    if f.pairs().iter().any(|&(_, k)| k > 1) {
        0
    } else if f.pairs().len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Split `n` into a coprime product `cubefree · cubefull`.
///
/// The cube-free part collects the prime powers with exponent ≤ 2, the
/// cube-full part those with exponent ≥ 3.
pub fn cube_split(n: u64) -> Result<(u64, u64)> {
    let f = factorize(n)?;
    let mut free = 1u64;
    let mut full = 1u64;
    for &(p, k) in f.pairs() {
        if k <= 2 {
            free *= p.pow(k);
        } else {
            full *= p.pow(k);
        }
    }
    Ok((free, full))
}

/// Combine congruences `x ≡ r_i (mod m_i)` with pairwise coprime moduli.
pub fn crt_combine(residues: &[(i64, u64)]) -> Result<(u64, u64)> {
    let mut acc_r = 0u64;
    let mut acc_m = 1u64;
    for &(r, m) in residues {
        if m == 0 {
            return Err(Error::Zero("modulus"));
        }
        if gcd(acc_m, m) != 1 {
            return Err(Error::NotCoprime(acc_m, m));
        }
        let new_m = acc_m.checked_mul(m).ok_or(Error::TooLarge {
            value: u64::MAX,
            bound: u64::MAX,
        })?;
        let r = reduce(r, m);
        // x = acc_r + acc_m * t with acc_m * t ≡ r - acc_r (mod m)
        let inv = inv_residue(acc_m % m, m).unwrap_or(0);
        let diff = reduce_wide(r as i128 - acc_r as i128, m);
        let t = mul_mod(diff, inv, m);
        acc_r = ((acc_r as u128 + acc_m as u128 * t as u128) % new_m as u128) as u64;
        acc_m = new_m;
    }
    Ok((acc_r, acc_m))
}

/// All square roots of `a` modulo an odd prime `p`, sorted ascending.
///
/// Uses Tonelli–Shanks; the result has 0, 1 (only for `a ≡ 0`) or 2 elements.
pub fn sqrt_mod_p(a: i64, p: u64) -> Result<Vec<u64>> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let a = reduce(a, p);
    if a == 0 {
        return Ok(vec![0]);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return Ok(Vec::new());
    }
    let r = tonelli_shanks(a, p);
    let mut roots = vec![r, p - r];
    roots.sort_unstable();
    Ok(roots)
}

/// Square root of a nonzero quadratic residue modulo an odd prime.
fn tonelli_shanks(a: u64, p: u64) -> u64 {
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Lift a square root `r` of `a` modulo an odd prime `p` (with `p ∤ a`) to a
/// square root modulo `p²` by one Hensel step.
pub(crate) fn hensel_lift_sqrt(a: u64, r: u64, p: u64) -> u64 {
    let p2 = p * p;
    let a = a % p2;
    let r2 = mul_mod(r, r, p2);
    // (r + t p)² ≡ a  ⇔  2 r t ≡ (a - r²)/p  (mod p)
    let diff = reduce_wide(a as i128 - r2 as i128, p2);
    debug_assert_eq!(diff % p, 0);
    let rhs = (diff / p) % p;
    let inv2r = inv_residue(mul_mod(2, r, p), p).expect("p odd and p ∤ r");
    let t = mul_mod(rhs, inv2r, p);
    (r + t * p) % p2
}

/// Number of divisors computed from the factorization.
pub fn divisor_count(n: u64) -> u64 {
    factorize(n)
        .expect("n >= 1")
        .pairs()
        .iter()
        .map(|&(_, k)| k as u64 + 1)
        .product()
}

/// All positive divisors of `n`, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, k) in factorize(n).expect("n >= 1").pairs() {
        let len = out.len();
        let mut pk = 1u64;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_inv(a: u64, m: u64) -> Option<u64> {
        (0..m).find(|&x| (a as u128 * x as u128) % m as u128 == 1 % m as u128)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inv(3, 7).unwrap(), 5);
        assert_eq!(mod_inv(1, 11).unwrap(), 1);
        assert_eq!(mod_inv(10, 9).unwrap(), 1);
        assert_eq!(brute_inv(10, 9), Some(1));
        assert_eq!(mod_inv(-3, 7).unwrap(), 2);
        assert!(matches!(mod_inv(6, 9), Err(Error::NoInverse { .. })));
    }

    #[test]
    fn inverse_matches_brute_force() {
        for m in 1..60u64 {
            for a in 0..m {
                let got = inv_residue(a, m);
                let want = if m == 1 { Some(0) } else { brute_inv(a, m) };
                if m > 1 {
                    assert_eq!(got, want, "a={a} m={m}");
                }
            }
        }
    }

    #[test]
    fn phi_and_squarefree() {
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(1), 1);
        assert!(!is_squarefree(12));
        assert!(is_squarefree(30));
        assert!(is_cubefree(36));
        assert!(!is_cubefree(24));
        assert_eq!(gcd(0, 17), 17);
        assert_eq!(gcd(17, 0), 17);
    }

    #[test]
    fn phi_divisor_sum_identity() {
        for n in 1..=10_000u64 {
            let s: u64 = divisors(n).into_iter().map(euler_phi).sum();
            assert_eq!(s, n);
        }
    }

    #[test]
    fn cube_split_examples() {
        assert_eq!(cube_split(72).unwrap(), (9, 8));
        assert_eq!(cube_split(1).unwrap(), (1, 1));
        assert_eq!(cube_split(30).unwrap(), (30, 1));
        assert!(cube_split(0).is_err());
    }

    #[test]
    fn cube_split_structure() {
        for n in 1..=10_000u64 {
            let (free, full) = cube_split(n).unwrap();
            assert_eq!(free * full, n);
            assert_eq!(gcd(free, full), 1);
            assert!(factorize(free).unwrap().pairs().iter().all(|&(_, k)| k <= 2));
            assert!(factorize(full).unwrap().pairs().iter().all(|&(_, k)| k >= 3));
        }
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_combine(&[(1, 3), (2, 5)]).unwrap(), (7, 15));
        assert_eq!(crt_combine(&[(0, 13)]).unwrap(), (0, 13));
        assert_eq!(crt_combine(&[(2, 4), (1, 3)]).unwrap(), (10, 12));
        assert!(matches!(
            crt_combine(&[(1, 4), (1, 6)]),
            Err(Error::NotCoprime(4, 6))
        ));
        // scan oracle
        for (want, m) in [(7u64, 15u64), (10, 12)] {
            let hits: Vec<u64> = (0..m)
                .filter(|&x| match m {
                    15 => x % 3 == 1 && x % 5 == 2,
                    _ => x % 4 == 2 && x % 3 == 1,
                })
                .collect();
            assert_eq!(hits, vec![want]);
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_p(4, 7).unwrap(), vec![2, 5]);
        assert_eq!(sqrt_mod_p(0, 7).unwrap(), vec![0]);
        assert!(sqrt_mod_p(3, 7).unwrap().is_empty());
        assert!(matches!(sqrt_mod_p(1, 2), Err(Error::NotOddPrime(2))));
        assert!(matches!(sqrt_mod_p(1, 15), Err(Error::NotOddPrime(15))));
    }

    #[test]
    fn sqrt_matches_brute_force() {
        for p in (3..100u64).filter(|&p| is_prime(p)) {
            for a in 0..p {
                let want: Vec<u64> = (0..p).filter(|&y| y * y % p == a).collect();
                assert_eq!(sqrt_mod_p(a as i64, p).unwrap(), want, "a={a} p={p}");
            }
        }
        // p ≡ 1 mod 8 exercises the full Tonelli–Shanks loop
        let p = 1_000_000_009u64 - 8; // 1000000001 is not prime; search upward
        let p = (p..).find(|&q| q % 8 == 1 && is_prime(q)).unwrap();
        for a in [2u64, 3, 5, 10, 12345] {
            for r in sqrt_mod_p(a as i64, p).unwrap() {
                assert_eq!(mul_mod(r, r, p), a % p);
            }
        }
    }

    #[test]
    fn hensel_lift() {
        for p in [3u64, 5, 7, 11, 13, 97] {
            for a in 1..p * p {
                if a % p == 0 {
                    continue;
                }
                for r in sqrt_mod_p(a as i64, p).unwrap() {
                    let l = hensel_lift_sqrt(a, r, p);
                    assert_eq!(l % p, r);
                    assert_eq!(mul_mod(l, l, p * p), a);
                }
            }
        }
    }
}
