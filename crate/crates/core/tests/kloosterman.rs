mod common;

use common::{divisors_by_trial, gcd, kl_direct};
use klab_core::kloosterman::{kl2_all_residues, DirectKl};
use klab_core::{kl2, kl2_direct, kl2_p2_closed, KlTable};
use proptest::prelude::*;

#[test]
fn small_values() {
    // Kl(1; 3) = (e(2/3) + e(4/3)) / √3 = −1/√3
    assert!((kl2(1, 3).unwrap().re() + 1.0 / 3f64.sqrt()).abs() < 1e-12);
    // modulus 1 has the single term e(0)
    assert!((kl2(5, 1).unwrap().re() - 1.0).abs() < 1e-12);
    // Ramanujan sum c_4(0) = 0
    assert!(kl2(0, 4).unwrap().value.norm() < 1e-12);
}

#[test]
fn all_residues_match_definition() {
    for q in [1u64, 2, 9, 12, 25, 49, 60, 97] {
        let fast = kl2_all_residues(q).unwrap();
        for a in 0..q as i64 {
            assert!((fast[a as usize] - kl_direct(a, q)).norm() < 1e-10, "a={a} q={q}");
        }
    }
}

#[test]
fn table_matches_direct() {
    for p in [5u64, 11, 31] {
        let t = KlTable::new(p).unwrap();
        let d = DirectKl::new(p).unwrap();
        for a in -40..40i64 {
            assert!((t.at(a) - d.eval(a).re).abs() < 1e-10);
        }
    }
}

#[test]
fn closed_form_mod_p_squared() {
    for p in [3u64, 5, 7, 13] {
        for a in (1..(p * p) as i64).filter(|a| a % p as i64 != 0) {
            let e = (kl2_p2_closed(a, p).unwrap().value - kl_direct(a, p * p)).norm();
            assert!(e < 1e-10, "a={a} p={p}");
        }
    }
}

#[test]
fn rejects_zero_modulus() {
    assert!(kl2(1, 0).is_err());
}

proptest! {
    #[test]
    fn crt_route_matches_definition(q in 1u64..400, a in -1000i64..1000) {
        let e = (kl2(a, q).unwrap().value - kl_direct(a, q)).norm();
        prop_assert!(e < 1e-9);
    }

    #[test]
    fn values_are_real(q in 1u64..2000, a in 0i64..2000) {
        prop_assert!(kl2(a, q).unwrap().value.im.abs() < 1e-9);
    }

    #[test]
    fn weil_bound(q in 1u64..3000, a in 0u64..3000) {
        let v = kl2(a as i64, q).unwrap().value.norm();
        let bound = divisors_by_trial(q) as f64 * (gcd(a, q) as f64).sqrt();
        prop_assert!(v <= bound + 1e-6, "|Kl|={v} bound={bound}");
    }

    #[test]
    fn twisted_multiplicativity(r in 1u64..60, s in 1u64..60, a in 0i64..5000) {
        prop_assume!(gcd(r, s) == 1);
        let inv = |x: u64, m: u64| (0..m).find(|y| x % m * y % m == 1 % m).unwrap();
        let (sb, rb) = (inv(s, r), inv(r, s));
        let lhs = kl2_direct(a, r * s).unwrap().value;
        let rhs = kl_direct(a * (sb * sb) as i64, r) * kl_direct(a * (rb * rb) as i64, s);
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn unit_substitution_invariance(q in 2u64..300, a in 1i64..300, t in 1u64..300) {
        // x ↦ t̄x turns Kl(a; q) into Σ e((a t̄ x + t x̄)/q), which is Kl(a; q) again
        prop_assume!(gcd(t, q) == 1);
        let mut z = klab_core::Complex64::new(0.0, 0.0);
        let tb = (0..q).find(|y| t % q * y % q == 1).unwrap();
        for x in (1..q).filter(|&x| gcd(x, q) == 1) {
            let xb = (0..q).find(|y| x * y % q == 1).unwrap();
            let k = ((a.rem_euclid(q as i64) as u64) * tb % q * x + t % q * xb) % q;
            z += klab_core::sum::e_q(k, q);
        }
        z /= (q as f64).sqrt();
        prop_assert!((z - kl2(a, q).unwrap().value).norm() < 1e-9);
    }
}
