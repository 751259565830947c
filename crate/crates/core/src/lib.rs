//! Exact evaluation of Kloosterman sums, their correlation and bilinear sums,
//! and the discrepancy of the divisor function in arithmetic progressions.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`], [`primes`], [`sieve`]: modular arithmetic, factorisation and a
//!   segmented divisor sieve;
//! * [`kloosterman`]: `Kl₂(a; q)` by direct summation, the prime-square
//!   closed form and the twisted CRT product;
//! * [`complete`]: complete correlation sums modulo `p` and `p²`;
//! * [`weight`], [`incomplete`], [`bounds`]: smooth weights, Poisson
//!   completion, the `q`-van der Corput sums and bilinear sums, together with
//!   the closed-form bound expressions they are compared against;
//! * [`discrepancy`]: `Δ(X; q, a)` in exact arithmetic and its smoothed and
//!   averaged variants;
//! * [`experiments`]: the good-moduli sieve experiment and the divisor sum
//!   along `n₁n₂² + 1`.

pub mod arith;
pub mod bounds;
pub mod complete;
pub mod discrepancy;
pub mod error;
pub mod experiments;
pub mod incomplete;
pub mod kloosterman;
pub mod primes;
mod quadrature;
pub mod sieve;
pub mod sum;
pub mod weight;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use kloosterman::{kl2, kl2_batch, kl2_direct, kl2_p2_closed, KlPlan, KlTable, KlValue};
pub use primes::{factorize, is_prime, Factorization};
pub use sieve::{divisor_sieve, DivisorSieve, DivisorTable};
