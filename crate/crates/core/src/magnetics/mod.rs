//! The invariant magnetic Laplacian of an equivariant pair.
//!
//! With `S(z) = νz + μ(τ ∂̄τ̄ − τ̄ ∂̄τ)` the potential is
//! `θ = −(S̄/2) dz + (S/2) dz̄` and the Laplacian (sign chosen so that the
//! Landau levels are negative) is
//!
//! ```text
//! Δ f = 4∂∂̄f + 2(S ∂f − S̄ ∂̄f) − |S|² f + μ(τ Δτ̄ − τ̄ Δτ) f.
//! ```
//!
//! Its field `B = ν + μ(|∂τ|² − |∂̄τ|²)` is constant for equivariant `τ`, and
//! a real gauge `φ` with `θ = θ_B + i dφ` conjugates `Δ` to the Landau
//! operator `Δ_B`: `Δ = e^{−iφ} Δ_B e^{iφ}`. The gauge module holds `φ`, the
//! lifting transform and the character `χ_τ`.

mod gauge;

use std::sync::OnceLock;

pub use gauge::{ChiTauConvention, PathChoice, GAUGE_CLOSED_TOL, GAUGE_IMAG_TOL};

use crate::automorphy::{CharacterTable, MixedFactor, PseudoCharacter};
use crate::calculus::{exterior_derivative, Grid, OneForm, Reality, ScalarField};
use crate::equivariant::{check_equivariance, Endomorphism, EquivariantMap};
use crate::error::{MafError, Result};
use crate::group::{DiscreteSubgroup, GroupElement};
use crate::report::{CheckReport, Residuals};
use crate::C64;

/// Word length used when tabulating `χ` on Γ.
pub const CHARACTER_WORD_LEN: usize = 8;
/// Tolerance of the equivariance check at construction.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;
/// Tolerance of the construction-time field constancy check.
const CONSTRUCTION_FIELD_TOL: f64 = 1e-6;

/// The data `(ν, μ, ρ, τ, Γ, χ)` with the derived field `B`.
#[derive(Debug)]
pub struct MagneticSystem {
    factor: MixedFactor,
    gamma: DiscreteSubgroup,
    chi: PseudoCharacter,
    b: f64,
    table: OnceLock<CharacterTable>,
}

impl Clone for MagneticSystem {
    fn clone(&self) -> Self {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        Self {
            factor: self.factor.clone(),
            gamma: self.gamma.clone(),
            chi: self.chi.clone(),
            b: self.b,
            table,
        }
    }
}

/// Field `ν + μ(|∂τ|² − |∂̄τ|²)` at `z`.
fn field_at(nu: f64, mu: f64, tau: &EquivariantMap, z: C64) -> Result<f64> {
    let (d, db) = tau.field().wirtinger(z)?;
    Ok(nu + mu * (d.norm_sqr() - db.norm_sqr()))
}

impl MagneticSystem {
    /// Validates the bundle: `ρ` is a homomorphism, `(ρ, τ)` is equivariant,
    /// `ρ(Γ) ⊂ Γ`, `χ` matches the generators, and `B` is positive and constant.
    pub fn new(
        nu: f64,
        mu: f64,
        rho: Endomorphism,
        tau: EquivariantMap,
        gamma: DiscreteSubgroup,
        chi: PseudoCharacter,
    ) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(MafError::InvalidInput(format!("ν = {nu} must be positive")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(MafError::InvalidInput(format!("μ = {mu} must be nonnegative")));
        }
        if chi.values_on_generators.len() != gamma.rank() {
            return Err(MafError::InvalidInput(format!(
                "χ has {} values for {} generators",
                chi.values_on_generators.len(),
                gamma.rank()
            )));
        }
        rho.validate()?;
        let eq = check_equivariance(&rho, &tau, 200, 0);
        if eq.max_residual > EQUIVARIANCE_TOL {
            return Err(MafError::Precondition(format!(
                "(ρ, τ) is not equivariant: residual {:e}",
                eq.max_residual
            )));
        }
        let closure = gamma.enumerate_words(4);
        for (s, label) in gamma.generators().iter().zip(gamma.labels()) {
            let image = rho.apply(s);
            if !closure.iter().any(|h| h.approx_eq(&image, 1e-9)) {
                return Err(MafError::Precondition(format!(
                    "ρ({label}) = {image} is not in Γ (words of length ≤ 4)"
                )));
            }
        }
        let b = field_at(nu, mu, &tau, C64::new(0.0, 0.0))?;
        let mut spread = 0.0f64;
        for z in Grid::square(2.0, 9).points() {
            spread = spread.max((field_at(nu, mu, &tau, z)? - b).abs());
        }
        if spread > CONSTRUCTION_FIELD_TOL {
            return Err(MafError::NonConstantField(spread));
        }
        if b <= 0.0 {
            return Err(MafError::NonPositiveField(b));
        }
        Ok(Self {
            factor: MixedFactor::new(nu, mu, rho, tau),
            gamma,
            chi,
            b,
            table: OnceLock::new(),
        })
    }

    /// `ν`, `μ = 0`, identity pair, trivial Γ.
    pub fn landau(nu: f64) -> Result<Self> {
        Self::new(
            nu,
            0.0,
            Endomorphism::Identity,
            EquivariantMap::identity(),
            DiscreteSubgroup::trivial(),
            PseudoCharacter::trivial(0),
        )
    }

    pub fn nu(&self) -> f64 {
        self.factor.nu
    }

    pub fn mu(&self) -> f64 {
        self.factor.mu
    }

    pub fn rho(&self) -> &Endomorphism {
        &self.factor.rho
    }

    pub fn tau(&self) -> &EquivariantMap {
        &self.factor.tau
    }

    pub fn gamma(&self) -> &DiscreteSubgroup {
        &self.gamma
    }

    pub fn chi(&self) -> &PseudoCharacter {
        &self.chi
    }

    pub fn factor(&self) -> &MixedFactor {
        &self.factor
    }

    /// The constant field.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `χ` on words of length ≤ 8, built on first use.
    pub fn chi_table(&self) -> &CharacterTable {
        self.table.get_or_init(|| {
            CharacterTable::extend(&self.gamma, &self.chi, self.nu(), self.mu(), self.rho(), CHARACTER_WORD_LEN)
                .expect("χ length checked at construction")
        })
    }

    /// `J(γ, z)`, defined for γ in the tabulated word closure.
    pub fn mixed_factor(&self, g: &GroupElement, z: C64) -> Result<C64> {
        Ok(self.chi_table().get(g)? * self.factor.free(g, z))
    }

    /// `S(z) = νz + μ(τ conj(∂τ) − τ̄ ∂̄τ)`.
    pub fn s_field(&self, z: C64) -> Result<C64> {
        let tau = self.tau();
        let t = tau.eval(z);
        let (d, db) = tau.field().wirtinger(z)?;
        Ok(z * self.nu() + (t * d.conj() - t.conj() * db) * self.mu())
    }

    /// `θ = −(S̄/2) dz + (S/2) dz̄`.
    pub fn potential(&self) -> OneForm {
        let (a, b) = (self.clone(), self.clone());
        let nan = C64::new(f64::NAN, f64::NAN);
        OneForm::new(
            ScalarField::new(move |z| a.s_field(z).map(|s| -s.conj() * 0.5).unwrap_or(nan)),
            ScalarField::new(move |z| b.s_field(z).map(|s| s * 0.5).unwrap_or(nan)),
            Reality::Imaginary,
        )
    }

    /// `max |coeff(dθ) − B|` over the grid (finite differences).
    pub fn curl_residual(&self, grid: &Grid) -> CheckReport {
        let d = exterior_derivative(&self.potential());
        let mut acc = Residuals::new();
        for z in grid.points() {
            acc.push((d.coeff.eval(z) - self.b).norm());
        }
        acc.report("potential_curl", 1e-7).with_meta("B", self.b)
    }

    pub fn magnetic_field(&self, z: C64) -> Result<f64> {
        field_at(self.nu(), self.mu(), self.tau(), z)
    }

    /// `max − min` of the field over the grid.
    pub fn field_constancy(&self, grid: &Grid) -> Result<CheckReport> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for z in grid.points() {
            let v = self.magnetic_field(z)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let analytic = self.tau().field().has_analytic_first();
        let tol = if analytic { 1e-8 } else { 1e-6 };
        Ok(CheckReport::scalar("field_constancy", hi - lo, tol)
            .with_meta("B", self.b)
            .with_meta("B_min", lo)
            .with_meta("B_max", hi)
            .with_meta("analytic_derivatives", analytic))
    }

    /// `μ(τ Δτ̄ − τ̄ Δτ)`, zero for harmonic `τ`.
    fn zeroth_order(&self, z: C64) -> Result<C64> {
        if self.mu() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let tau = self.tau();
        let lap = tau.field().laplacian(z)?;
        let t = tau.eval(z);
        Ok((t * lap.conj() - t.conj() * lap) * self.mu())
    }

    /// The explicit mixed Laplacian applied to `f` at `z`.
    pub fn apply_mixed_laplacian(&self, f: &ScalarField, z: C64) -> Result<C64> {
        let s = self.s_field(z)?;
        let j = f.jet(z)?;
        Ok(j.dz_dzbar * 4.0 + (s * j.dz - s.conj() * j.dzbar) * 2.0 - j.f * s.norm_sqr()
            + self.zeroth_order(z)? * j.f)
    }

    /// `T_g f = conj(J(g, ·)) f(g·)` for `g` in the word closure of Γ.
    pub fn representation(&self, g: &GroupElement, f: &ScalarField) -> Result<ScalarField> {
        let chi = self.chi_table().get(g)?;
        Ok(self.representation_free(g, f).scale(chi.conj()))
    }

    /// `T_g` without the character, for arbitrary `g ∈ G`.
    pub fn representation_free(&self, g: &GroupElement, f: &ScalarField) -> ScalarField {
        if g.is_identity(0.0) {
            return f.clone();
        }
        let (factor, f, g, h) = (self.factor.clone(), f.clone(), *g, f.fd_step());
        ScalarField::new(move |z| factor.free(&g, z).conj() * f.eval(g.act(z))).with_fd_step(h)
    }

    /// `max_grid |T_g(Δf) − Δ(T_g f)|` with the character-free `T_g`.
    pub fn invariance_residual(&self, g: &GroupElement, f: &ScalarField, grid: &Grid) -> Result<CheckReport> {
        let tf = self.representation_free(g, f);
        let mut acc = Residuals::new();
        for z in grid.points() {
            let lhs = self.factor.free(g, z).conj() * self.apply_mixed_laplacian(f, g.act(z))?;
            let rhs = self.apply_mixed_laplacian(&tf, z)?;
            acc.push((lhs - rhs).norm());
        }
        Ok(acc
            .report("invariance", 1e-5)
            .with_meta("g", serde_json::to_value(g).unwrap_or_default()))
    }

    /// Spread over the grid of `T_g(T_h f) / T_{hg} f`, which is a constant
    /// phase for a projective representation.
    pub fn projective_phase_spread(
        &self,
        g: &GroupElement,
        h: &GroupElement,
        f: &ScalarField,
        grid: &Grid,
    ) -> CheckReport {
        let th = self.representation_free(h, f);
        let tgth = self.representation_free(g, &th);
        let thg = self.representation_free(&h.compose(g), f);
        let mut acc = Residuals::new();
        let mut first = None;
        for z in grid.points() {
            let den = thg.eval(z);
            if den.norm() < 1e-8 {
                continue;
            }
            let ratio = tgth.eval(z) / den;
            let r0 = *first.get_or_insert(ratio);
            acc.push((ratio - r0).norm().max((ratio.norm() - 1.0).abs()));
        }
        acc.report("projective_phase_spread", 1e-9)
    }
}

/// Landau operator `Δ_B f = 4∂∂̄f + 2B(z∂f − z̄∂̄f) − B²|z|² f`.
pub fn apply_landau(b: f64, f: &ScalarField, z: C64) -> Result<C64> {
    let j = f.jet(z)?;
    Ok(j.dz_dzbar * 4.0 + (z * j.dz - z.conj() * j.dzbar) * (2.0 * b) - j.f * (b * b * z.norm_sqr()))
}

#[cfg(test)]
mod tests;
