//! Mixed automorphic functions on the rigid-motion group `U(1)⋉ℂ`.
//!
//! The crate builds equivariant pairs `(ρ, τ)`, mixed automorphic factors,
//! the invariant magnetic Laplacian attached to the potential
//! `θ = -(S̄/2) dz + (S/2) dz̄`, the gauge transform lifting mixed automorphic
//! functions to classical ones, Landau spectra with their projector kernels,
//! and the constant-field criteria on `ℂⁿ`. Every identity is checked
//! numerically and summarised in a [`CheckReport`].
//!
//! Module map:
//!
//! * [`group`]: elements `[a, b]`, composition, the action `z ↦ az + b`, word enumeration.
//! * [`equivariant`]: endomorphism families, fixed-point sets `Ξ_ρ`, `τ_β` and equivariance checks.
//! * [`calculus`]: scalar fields with Wirtinger derivatives, 1-/2-forms, line integrals, quadrature.
//! * [`automorphy`]: automorphic factors, pseudo-characters, phases and the quantization check.
//! * [`magnetics`]: the mixed Laplacian, invariance, field, gauge, lifting and intertwining.
//! * [`spectral`]: Hermite/Laguerre, Landau levels, strip eigenfunctions, projector kernels.
//! * [`highdim`]: the `ℂⁿ` layer and its constant-field criteria.
//! * [`config`] / [`runner`]: JSON configuration, bundled systems, the check orchestrator.

pub mod automorphy;
pub mod calculus;
pub mod config;
pub mod equivariant;
pub mod error;
pub mod group;
pub mod highdim;
pub mod magnetics;
pub mod report;
pub mod runner;
pub mod spectral;

#[cfg(test)]
pub(crate) mod fixtures;

pub use num_complex::Complex64 as C64;

pub use error::{MafError, Result};
pub use group::{DiscreteSubgroup, GroupElement};
pub use report::CheckReport;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{iθ}` for real `θ`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Hermitian product `⟨z, w⟩ = z·w̄`.
#[inline]
pub fn herm(z: C64, w: C64) -> C64 {
    z * w.conj()
}
