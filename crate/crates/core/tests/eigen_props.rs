use std::sync::OnceLock;

use fracspec::eigen::{rayleigh_quotient, solve_spectrum, Spectrum};
use fracspec::geometry::Domain;
use fracspec::operator::Discretization;
use fracspec::report::Refinement;
use fracspec::FractionalOrder;
use proptest::prelude::*;

fn ord(s: f64) -> FractionalOrder {
    FractionalOrder::new(s).unwrap()
}

fn interval_problem() -> &'static (Discretization, Spectrum) {
    static P: OnceLock<(Discretization, Spectrum)> = OnceLock::new();
    P.get_or_init(|| {
        let d = Discretization::new(&Domain::interval(-1.0, 1.0).unwrap(), ord(0.4), 2.0 / 64.0).unwrap();
        let sp = d.spectrum(8).unwrap();
        (d, sp)
    })
}

#[test]
fn spectrum_is_ascending_positive_and_normalized() {
    let (_, sp) = interval_problem();
    assert!(sp.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    assert!(sp.eigenvalues[0] > 0.0);
    assert!(sp.eigenvalues[7] > sp.eigenvalues[0]);
    assert!(sp.orthonormality_residual() <= 1e-10);
    for v in &sp.eigenvectors {
        // first entry of largest magnitude, ties from symmetry broken by position
        let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() * (1.0 + 1e-12) { x } else { m });
        assert!(big > 0.0);
    }
    assert!(sp.residuals.iter().all(|&r| r <= 1e-8));
}

#[test]
fn too_many_eigenpairs_is_an_error() {
    let (d, _) = interval_problem();
    assert!(solve_spectrum(&d.matrix, d.h(), 1, d.dim() + 1).is_err());
    assert!(solve_spectrum(&d.matrix, d.h(), 1, 0).is_err());
}

#[test]
fn disk_multiplicities_are_resolved_deterministically() {
    let d = Discretization::new(&Domain::unit_disk(), ord(0.5), 2.0 / 16.0).unwrap();
    let a = d.spectrum(6).unwrap();
    let b = d.spectrum(6).unwrap();
    assert_eq!(a, b);
    let rel = (a.eigenvalues[2] - a.eigenvalues[1]) / a.eigenvalues[1];
    assert!(rel < 1e-9, "the second eigenvalue of the disk is double, rel gap {rel}");
    assert!(a.eigenvalues[1] - a.eigenvalues[0] > 1e-6);
    assert!(a.orthonormality_residual() <= 1e-10);
}

#[test]
fn discrete_domain_monotonicity() {
    // the node set of the smaller domain is a subset of the larger one on the same lattice
    let h = 2.0 / 64.0;
    for (small, large) in [
        (Domain::interval(-0.5, 0.5).unwrap(), Domain::interval(-1.0, 1.0).unwrap()),
        (Domain::ball([0.0, 0.0], 0.5).unwrap(), Domain::unit_disk()),
    ] {
        let hh = if small.dim() == 1 { h } else { 4.0 * h };
        let a = Discretization::new(&small, ord(0.5), hh).unwrap().spectrum(4).unwrap();
        let b = Discretization::new(&large, ord(0.5), hh).unwrap().spectrum(4).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!(x >= y, "{x} < {y}");
        }
    }
}

#[test]
fn extrapolated_domain_monotonicity() {
    let s = ord(0.5);
    let small = Refinement::compute(&Domain::interval(-0.5, 0.5).unwrap(), s, 2.0 / 512.0, 6).unwrap();
    let large = Refinement::compute(&Domain::interval(-1.0, 1.0).unwrap(), s, 2.0 / 512.0, 6).unwrap();
    for (a, b) in small.extrapolated.iter().zip(&large.extrapolated) {
        assert!(a.value + 2.0 * a.error >= b.value - 2.0 * b.error);
    }
}

proptest! {
    #[test]
    fn rayleigh_quotient_bounds_the_first_eigenvalue(v in prop::collection::vec(-1.0f64..1.0, 63)) {
        let (d, sp) = interval_problem();
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let q = rayleigh_quotient(&v, &d.matrix).unwrap();
        prop_assert!(q >= sp.eigenvalues[0] * (1.0 - 1e-12));
    }
}
