//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use klab_core::Complex64;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn divisors_by_trial(n: u64) -> u64 {
    (1..=n).take_while(|i| i * i <= n).filter(|i| n % i == 0).map(|i| if i * i == n { 1 } else { 2 }).sum()
}

pub fn is_prime_by_trial(n: u64) -> bool {
    n >= 2 && (2..).take_while(|i| i * i <= n).all(|i| n % i != 0)
}

/// Inverse by search over the residues.
pub fn inverse_by_search(a: u64, q: u64) -> Option<u64> {
    (0..q).find(|&x| (a % q) * x % q == 1 % q)
}

/// `q^{-1/2} Σ_{x unit} e((ax + x̄)/q)` straight from the definition.
pub fn kl_direct(a: i64, q: u64) -> Complex64 {
    let a = a.rem_euclid(q as i64) as u64;
    let mut z = Complex64::new(0.0, 0.0);
    for x in 0..q {
        if let Some(xi) = inverse_by_search(x, q).filter(|_| gcd(x, q) == 1) {
            let t = 2.0 * PI * ((a * x + xi) % q) as f64 / q as f64;
            z += Complex64::new(t.cos(), t.sin());
        }
    }
    z / (q as f64).sqrt()
}
