//! Primality and integer factorization for 64-bit inputs.
//!
//! Factorization runs trial division by the primes below 10⁶, then a
//! deterministic Miller–Rabin test and Brent's variant of Pollard rho on
//! whatever cofactor remains.

use once_cell::sync::Lazy;

use crate::arith::{gcd, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Largest accepted input, `2⁶³`.
pub const MAX_INPUT: u64 = 1 << 63;

const TRIAL_LIMIT: usize = 1_000_000;

static SMALL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| primes_up_to(TRIAL_LIMIT as u64));

/// Primes `≤ n` by a plain sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Deterministic Miller–Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Canonical prime factorization: primes strictly increasing, exponents ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
    value: u64,
}

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }

    /// The prime powers `p^k ‖ n`.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.pairs.iter().map(|&(p, k)| (p, k, p.pow(k)))
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.pairs
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, k)| k)
    }

    /// Product of the prime powers; equals `value()` by construction.
    pub fn product(&self) -> u64 {
        self.pairs.iter().map(|&(p, k)| p.pow(k)).product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.pairs.iter().map(|&(_, k)| k as u64 + 1).product()
    }

    /// Squarefree kernel `rad(n)`.
    pub fn radical(&self) -> u64 {
        self.pairs.iter().map(|&(p, _)| p).product()
    }
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Zero("n"));
    }
    if n > MAX_INPUT {
        return Err(Error::TooLarge {
            value: n,
            bound: MAX_INPUT,
        });
    }
    let mut primes = Vec::new();
    let mut m = n;
    for &p in SMALL_PRIMES.iter() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            primes.push((p, k));
        }
    }
    if m > 1 {
        let limit = TRIAL_LIMIT as u64;
        if m < limit * limit {
            // every prime factor below 10⁶ has been removed
            primes.push((m, 1));
        } else {
            let mut big = Vec::new();
            split_large(m, &mut big);
            big.sort_unstable();
            let mut i = 0;
            while i < big.len() {
                let p = big[i];
                let k = big[i..].iter().take_while(|&&q| q == p).count();
                primes.push((p, k as u32));
                i += k;
            }
        }
    }
    primes.sort_unstable();
    Ok(Factorization {
        pairs: primes,
        value: n,
    })
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let mut c = 1;
    let d = loop {
        if let Some(d) = pollard_brent(n, c) {
            break d;
        }
        c += 1;
    };
    split_large(d, out);
    split_large(n / d, out);
}

/// One run of Brent's cycle-finding rho with `f(x) = x² + c`.
fn pollard_brent(n: u64, c: u64) -> Option<u64> {
    const BATCH: u64 = 128;
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BATCH;
        }
        r *= 2;
        if r > 1 << 26 {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            if k > 0 {
                out.push((p, k));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(factorize(72).unwrap().pairs(), &[(2, 3), (3, 2)]);
        assert!(factorize(1).unwrap().pairs().is_empty());
        assert_eq!(factorize(9973).unwrap().pairs(), &[(9973, 1)]);
        assert_eq!(trial_division(9973), vec![(9973, 1)]);
        assert_eq!(factorize(0), Err(Error::Zero("n")));
    }

    #[test]
    fn large_semiprimes_and_powers() {
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let r = 2_147_483_647u64;
        assert_eq!(factorize(p * q).unwrap().pairs(), &[(p, 1), (q, 1)]);
        assert_eq!(factorize(p * p * 7).unwrap().pairs(), &[(7, 1), (p, 2)]);
        assert_eq!(factorize(r * 4_294_967_291).unwrap().pairs(), &[(r, 1), (4_294_967_291, 1)]);
        assert_eq!(factorize(MAX_INPUT).unwrap().pairs(), &[(2, 63)]);
        assert!(factorize(MAX_INPUT + 1).is_err());
    }

    #[test]
    fn primality_small() {
        let sieve = primes_up_to(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), sieve.binary_search(&n).is_ok(), "n={n}");
        }
        // strong pseudoprime to several small bases
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn trial_division_agrees_below_10_4() {
        for n in 1..10_000u64 {
            assert_eq!(factorize(n).unwrap().pairs(), trial_division(n).as_slice());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn factorization_reconstructs(n in 1u64..=1_000_000_000_000) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.product(), n);
            prop_assert!(f.pairs().windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.pairs().iter().all(|&(p, k)| k >= 1 && is_prime(p)));
        }
    }
}
