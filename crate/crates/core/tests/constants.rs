use std::f64::consts::PI;

use fracspec::special::{
    ball_volume, b_ns, b_ns_quadrature, c_ns, e_m, e_m_quadrature, gamma_fn, sphere_area, ConstantsTable,
};
use fracspec::FractionalOrder;
use proptest::prelude::*;

fn ord(s: f64) -> FractionalOrder {
    FractionalOrder::new(s).unwrap()
}

#[test]
fn normalization_constant_examples() {
    assert!((c_ns(1, ord(0.5)).unwrap() - 1.0 / PI).abs() < 1e-15);
    assert!((c_ns(2, ord(0.5)).unwrap() - 0.5 / PI).abs() < 1e-15);
}

#[test]
fn sphere_areas() {
    assert_eq!(sphere_area(1).unwrap(), 2.0);
    assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
    assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-14);
    assert_eq!(ball_volume(1).unwrap(), 2.0);
}

#[test]
fn e_m_examples() {
    assert!((e_m(2, ord(0.5)).unwrap() - 1.0).abs() < 1e-14);
    assert!((e_m(7, ord(0.5)).unwrap() - 1.0 / 6.0).abs() < 1e-14);
    for s in [0.1, 0.45, 0.9] {
        assert!((e_m(3, ord(s)).unwrap() - 1.0 / (1.0 + 2.0 * s)).abs() < 1e-15);
    }
}

#[test]
fn b_ns_examples() {
    assert_eq!(b_ns(1, ord(0.3)).unwrap(), 1.0);
    assert!((b_ns(5, ord(0.3)).unwrap() - 1.0).abs() < 1e-10);
    assert!((b_ns(8, ord(0.7)).unwrap() - 1.0).abs() < 1e-10);
    assert!((b_ns_quadrature(8, ord(0.7), 1e-10).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn table_is_consistent() {
    for n in 1..=6 {
        let t = ConstantsTable::compute(n, ord(0.35)).unwrap();
        assert_eq!(t.vol_b1, t.omega_nm1 / n as f64);
        assert!(t.c_ns > 0.0 && t.omega_nm1 > 0.0);
        assert_eq!(t.e_n.is_some(), n >= 2);
    }
}

#[test]
fn gamma_overflow_is_an_error() {
    assert!(gamma_fn(200.0).is_err());
    assert!(gamma_fn(0.0).is_err());
}

proptest! {
    #[test]
    fn b_ns_is_one(n in 2usize..=12, s in 0.02f64..0.98) {
        prop_assert!((b_ns(n, ord(s)).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn e_m_recursion_matches_quadrature(m in 2usize..=12, s in 0.05f64..0.95) {
        let a = e_m(m, ord(s)).unwrap();
        let b = e_m_quadrature(m, ord(s), 1e-10).unwrap();
        prop_assert!((a - b).abs() <= 1e-8, "m={} s={} {} {}", m, s, a, b);
    }

    #[test]
    fn c_ns_self_consistency(n in 1usize..=10, s in 0.01f64..0.99) {
        let lhs = c_ns(n, ord(s)).unwrap() * gamma_fn(1.0 - s).unwrap()
            / (4f64.powf(s) * PI.powf(-0.5 * n as f64) * s);
        let rhs = gamma_fn(0.5 * (n as f64 + 2.0 * s)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn order_bounds(s in -2.0f64..3.0) {
        prop_assert_eq!(FractionalOrder::new(s).is_ok(), s > 0.0 && s < 1.0);
    }
}
