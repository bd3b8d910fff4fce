//! Numerical substrate: scalar fields with Wirtinger derivatives, differential
//! forms in the `(dz, dz̄)` basis, line integrals and tensor Gauss-Legendre
//! quadrature.
//!
//! Conventions: `∂ = ½(∂_x − i∂_y)`, `∂̄ = ½(∂_x + i∂_y)`, and
//! `dz∧dz̄ = −2i dx∧dy`.

mod field;
mod forms;
mod grid;
mod quadrature;

pub use field::{wirtinger, FieldFn, Jet, ScalarField, DEFAULT_FD_STEP};
pub(crate) use field::diff1;
pub use forms::{exterior_derivative, line_integral, OneForm, Reality, TwoForm, DZ_DZBAR_AREA};
pub use grid::{Grid, Rect};
pub use quadrature::{gauss_legendre, quad2d, quad2d_composite, QuadGrid};
