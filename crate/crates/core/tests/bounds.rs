use klab_core::bounds::{bound_l, bound_m};
use proptest::prelude::*;

#[test]
fn unit_point() {
    // each of the four terms is 1
    assert_eq!(bound_l(1.0, 1.0, 1.0, 1.0), 4.0);
    assert_eq!(bound_m(1.0, 1.0, 1.0, 1.0), 4.0);
}

#[test]
fn known_value() {
    // X^{1/4} = 2 with r = s = U = 1: 2 + 2 + 1 + 1
    assert!((bound_l(1.0, 1.0, 1.0, 16.0) - 6.0).abs() < 1e-12);
    // U^{1/4} = 2 as well: 4 + 2 + 1 + 2
    assert!((bound_l(1.0, 1.0, 16.0, 16.0) - 9.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn monotone_in_x(r in 1.0f64..100.0, s in 1.0f64..100.0, u in 1.0f64..1e4, x in 1.0f64..1e8, k in 1.0f64..10.0) {
        prop_assert!(bound_l(r, s, u, x * k) >= bound_l(r, s, u, x));
        prop_assert!(bound_m(r, s, u, x * k) >= bound_m(r, s, u, x));
    }

    #[test]
    fn m_dominates_l_for_u_at_least_one(r in 1.0f64..100.0, s in 1.0f64..100.0, u in 1.0f64..1e4, x in 1.0f64..1e8) {
        prop_assert!(bound_m(r, s, u, x) >= bound_l(r, s, u, x) * (1.0 - 1e-12));
    }
}
