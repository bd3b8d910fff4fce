//! Systems shared by the unit tests.

use std::f64::consts::{FRAC_PI_3, PI};

use crate::automorphy::PseudoCharacter;
use crate::equivariant::{Endomorphism, EquivariantMap};
use crate::magnetics::MagneticSystem;
use crate::{cis, DiscreteSubgroup, GroupElement, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn t(b: C64) -> GroupElement {
    GroupElement::translation(b)
}

/// ν = 1, μ = 0 on the square lattice.
pub fn landau() -> MagneticSystem {
    MagneticSystem::new(
        1.0,
        0.0,
        Endomorphism::Identity,
        EquivariantMap::identity(),
        DiscreteSubgroup::lattice(c(1.0, 0.0), c(0.0, 1.0)).unwrap(),
        PseudoCharacter::trivial(2),
    )
    .unwrap()
}

/// ν = 2, μ = 1, τ = z̄ on ℤ.
pub fn conjugate() -> MagneticSystem {
    MagneticSystem::new(
        2.0,
        1.0,
        Endomorphism::ComplexConjugate,
        EquivariantMap::conjugate(),
        DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap(),
        PseudoCharacter::trivial(1),
    )
    .unwrap()
}

/// ν = 1, μ = 1/2, ρ = conjugation by a 60° rotation, on a ρ-stable hexagonal lattice.
pub fn alteration() -> MagneticSystem {
    let h = GroupElement::from_angle(FRAC_PI_3, c(1.0, 0.0));
    let b = 1.5;
    let l = (2.0 * PI / (b * 3f64.sqrt())).sqrt();
    MagneticSystem::new(
        1.0,
        0.5,
        Endomorphism::Conjugation(h),
        EquivariantMap::affine_map(h.a(), h.b()),
        DiscreteSubgroup::lattice(c(l, 0.0), cis(FRAC_PI_3) * l).unwrap(),
        PseudoCharacter::trivial(2),
    )
    .unwrap()
}

pub fn systems() -> Vec<MagneticSystem> {
    vec![landau(), conjugate(), alteration()]
}
