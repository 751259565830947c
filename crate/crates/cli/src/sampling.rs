//! Seeded random specs for the sweeps.

use klab_core::arith::{gcd, is_cubefree};
use klab_core::complete::{CorrelationSpec, Mobius, PrimeCorrelation, SquareCorrelation};
use klab_core::incomplete::{PoissonSpec, QvdcSpec};
use klab_core::primes::primes_up_to;
use rand::Rng;

pub fn odd_primes(lo: u64, hi: u64) -> Vec<u64> {
    primes_up_to(hi).into_iter().filter(|&p| p > 2 && p >= lo).collect()
}

/// Integer drawn log-uniformly from `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: u64, hi: u64) -> u64 {
    let (l, h) = ((lo as f64).ln(), ((hi + 1) as f64).ln());
    let v = rng.gen_range(l..h).exp().floor() as u64;
    v.clamp(lo, hi)
}

/// Complete correlation sum: prime modulus with `k ∈ {2, 4}` random maps, or
/// the four-factor shape modulo `p²`.
pub fn correlation_spec<R: Rng>(rng: &mut R, max_p: u64, max_square_p: u64) -> CorrelationSpec {
    if rng.gen_bool(0.5) {
        let ps = odd_primes(3, max_p.max(3));
        let p = ps[rng.gen_range(0..ps.len())];
        let k = if rng.gen_bool(0.5) { 2 } else { 4 };
        CorrelationSpec::Prime(PrimeCorrelation {
            p,
            h: rng.gen_range(0..p as i64),
            maps: (0..k).map(|_| Mobius::random(p, rng)).collect(),
        })
    } else {
        let ps = odd_primes(3, max_square_p.max(3));
        let p = ps[rng.gen_range(0..ps.len())];
        CorrelationSpec::Square(SquareCorrelation::four(
            p,
            rng.gen_range(0..(p * p) as i64),
            rng.gen_range(1..p as i64),
            rng.gen_range(1..p as i64),
            rng.gen_range(0..(p * p) as i64),
            rng.gen_range(0..(p * p) as i64),
        ))
    }
}

fn pairwise_coprime(v: &[u64]) -> bool {
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| gcd(v[i], v[j]) == 1))
}

fn unit<R: Rng>(rng: &mut R, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    loop {
        let a = rng.gen_range(1..m);
        if gcd(a, m) == 1 {
            return a;
        }
    }
}

/// Admissible completion spec with `su₁u₂ ≤ max_c` and `N` log-uniform in
/// `[max(2, c/50), c]`.
pub fn poisson_spec<R: Rng>(rng: &mut R, max_c: u64) -> PoissonSpec {
    loop {
        let s = log_uniform(rng, 1, 40);
        let u1 = log_uniform(rng, 1, 80);
        let u2 = log_uniform(rng, 1, 80);
        let c = s * u1 * u2;
        if c < 2 || c > max_c || !pairwise_coprime(&[s, u1, u2]) {
            continue;
        }
        if ![s, u1, u2].iter().all(|&m| is_cubefree(m)) {
            continue;
        }
        let lo = (c / 50).max(2);
        return PoissonSpec {
            a: unit(rng, c),
            s,
            u1,
            u2,
            b1: rng.gen_range(0..c as i64),
            b2: rng.gen_range(0..c as i64),
            n: log_uniform(rng, lo, c) as f64,
        };
    }
}

/// Shifted-correlation spec with `rsu₁, rsu₂ ≤ max_modulus`.
pub fn qvdc_spec<R: Rng>(rng: &mut R, max_modulus: u64) -> QvdcSpec {
    loop {
        let r = log_uniform(rng, 1, 30);
        let s = log_uniform(rng, 1, 30);
        let u1 = log_uniform(rng, 1, 40);
        let u2 = if rng.gen_bool(0.2) { u1 } else { log_uniform(rng, 1, 40) };
        let q = r * s * u1.max(u2);
        if q > max_modulus || !pairwise_coprime(&[r, s, u1]) || !pairwise_coprime(&[r, s, u2]) {
            continue;
        }
        if u1 != u2 && gcd(u1, u2) != 1 {
            continue;
        }
        if ![s, u1, u2].iter().all(|&m| is_cubefree(m)) {
            continue;
        }
        let divs = klab_core::arith::divisors(r);
        let c = divs[rng.gen_range(0..divs.len())];
        return QvdcSpec {
            a: unit(rng, r * s * u1 * u2) as i64,
            r,
            s,
            u1,
            u2,
            c,
            n: log_uniform(rng, 2, (r * s * u1).max(2)) as f64,
        };
    }
}

/// `(a, q)` with `q ∈ [1, max_q]` and `a` uniform modulo `q`.
pub fn kl_pair<R: Rng>(rng: &mut R, max_q: u64) -> (i64, u64) {
    let q = rng.gen_range(1..=max_q);
    (rng.gen_range(0..q as i64), q)
}

/// Coprime `(r, s)` in `[1, max]²`.
pub fn coprime_pair<R: Rng>(rng: &mut R, max: u64) -> (u64, u64) {
    loop {
        let r = rng.gen_range(1..=max);
        let s = rng.gen_range(1..=max);
        if gcd(r, s) == 1 {
            return (r, s);
        }
    }
}
