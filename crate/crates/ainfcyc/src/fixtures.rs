//! Small example algebras used throughout the test suites and shipped as
//! CLI fixture files: the cohomology rings of the sphere and the projective
//! plane, and the quantum deformation of the sphere.

use crate::barcx::{AInftyStructure, Basis};
use crate::novikov::{FilteredAInfty, GappedMonoid};
use crate::signcore::{BasisElement, Rational, Scalar};
use num_traits::One;

/// Cohomology of the 2-sphere: unit `u` in degree 0, `t` in degree 2,
/// `t^2 = 0`. The cyclic pairing is `<u,t> = <t,u> = 1`.
pub fn sphere<S: Scalar>(truncation_order: usize) -> AInftyStructure<S> {
    let basis = Basis::new(vec![BasisElement::unit("u", 0), BasisElement::new("t", 2)])
        .expect("one unit");
    let mut a = AInftyStructure::new(basis, truncation_order);
    let one = S::one();
    // cup product; all degrees even so the bar-shift signs are all +1
    a.add_op(&[0, 0], &[(0, one.clone())]).unwrap();
    a.add_op(&[0, 1], &[(1, one.clone())]).unwrap();
    a.add_op(&[1, 0], &[(1, one)]).unwrap();
    a
}

/// Cohomology of the projective plane: `u` (deg 0, unit), `h` (deg 2),
/// `h2` (deg 4), cup product `h * h = h2`. Pairing `<h^a,h^b> = delta_{a+b,2}`.
pub fn proj_plane<S: Scalar>(truncation_order: usize) -> AInftyStructure<S> {
    let basis = Basis::new(vec![
        BasisElement::unit("u", 0),
        BasisElement::new("h", 2),
        BasisElement::new("h2", 4),
    ])
    .expect("one unit");
    let mut a = AInftyStructure::new(basis, truncation_order);
    let one = S::one;
    a.add_op(&[0, 0], &[(0, one())]).unwrap();
    a.add_op(&[0, 1], &[(1, one())]).unwrap();
    a.add_op(&[1, 0], &[(1, one())]).unwrap();
    a.add_op(&[0, 2], &[(2, one())]).unwrap();
    a.add_op(&[2, 0], &[(2, one())]).unwrap();
    a.add_op(&[1, 1], &[(2, one())]).unwrap();
    a
}

/// Quantum deformation of the sphere: the [`sphere`] structure plus the
/// energy-1, Maslov-2 correction `m_{2,(1,2)}(t,t) = u`. The monoid is
/// generated by `(1,2)`.
pub fn quantum_sphere(order_bound: usize, cutoff: Rational) -> FilteredAInfty {
    let basis = Basis::new(vec![BasisElement::unit("u", 0), BasisElement::new("t", 2)])
        .expect("one unit");
    let monoid = GappedMonoid::new(vec![(Rational::one(), 2)], cutoff);
    let mut a = FilteredAInfty::new(basis, monoid, order_bound);
    let zero = (Rational::from_int(0), 0);
    let one = Rational::one;
    a.add_op(&[0, 0], zero.clone(), &[(0, one())]).unwrap();
    a.add_op(&[0, 1], zero.clone(), &[(1, one())]).unwrap();
    a.add_op(&[1, 0], zero, &[(1, one())]).unwrap();
    a.add_op(&[1, 1], (Rational::one(), 2), &[(0, one())]).unwrap();
    a
}

/// Pairing matrix for [`sphere`]: `<u,t> = 1 = <t,u>`.
pub fn sphere_pairing<S: Scalar>() -> Vec<Vec<S>> {
    vec![
        vec![S::zero(), S::one()],
        vec![S::one(), S::zero()],
    ]
}

/// Pairing matrix for [`proj_plane`]: `<h^a,h^b> = delta_{a+b,2}`.
pub fn proj_plane_pairing<S: Scalar>() -> Vec<Vec<S>> {
    let o = S::one;
    let z = S::zero;
    vec![
        vec![z(), z(), o()],
        vec![z(), o(), z()],
        vec![o(), z(), z()],
    ]
}
