//! Gauge `φ`, the lifting transform `W = e^{iφ}` and the character `χ_τ`.
//!
//! `θ − θ_B = i dφ` gives `∂φ/∂z = (i/2)(S̄ − B z̄)`; `φ` is the line integral
//! of `dφ` from the origin, so `φ(0) = 0`.

use serde::{Deserialize, Serialize};

use super::MagneticSystem;
use crate::automorphy::j_factor;
use crate::calculus::{line_integral, Grid, OneForm, Reality, ScalarField};
use crate::error::{MafError, Result};
use crate::group::GroupElement;
use crate::report::{CheckReport, Residuals};
use crate::{cis, herm, C64, I};

/// Allowed disagreement between the two integration paths.
pub const GAUGE_CLOSED_TOL: f64 = 1e-8;
/// Allowed imaginary part of `φ`.
pub const GAUGE_IMAG_TOL: f64 = 1e-9;
/// Gauss-Legendre panels per path segment.
const PATH_PANELS: usize = 4;

/// Polyline from `0` to `z` used for the gauge integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// `0 → Re z → z`.
    RealFirst,
    /// `0 → i Im z → z`.
    ImagFirst,
    /// Both, checked against each other.
    Both,
}

impl PathChoice {
    fn path(self, z: C64) -> Vec<C64> {
        match self {
            PathChoice::ImagFirst => vec![C64::new(0.0, 0.0), C64::new(0.0, z.im), z],
            _ => vec![C64::new(0.0, 0.0), C64::new(z.re, 0.0), z],
        }
    }
}

/// Form of the correction factor in `χ_τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiTauConvention {
    /// `χ(γ) exp(iφ(γ·0) − iμ Im⟨τ(0), ρ(γ)⁻¹·0⟩)`.
    Derived,
    /// Same with `2μ` in place of `μ`.
    DoubledMu,
    /// `χ(γ)` alone.
    DroppedCorrection,
}

impl MagneticSystem {
    /// `∂φ/∂z = (i/2)(S̄ − B z̄)`.
    pub fn gauge_dphi_dz(&self, z: C64) -> Result<C64> {
        let s = self.s_field(z)?;
        Ok(I * 0.5 * (s.conj() - z.conj() * self.b))
    }

    /// `∂∂̄φ = (i/2) μ (τ̄ ∂∂̄τ − τ conj(∂∂̄τ))`, zero for harmonic `τ`.
    fn gauge_dz_dzbar(&self, z: C64) -> Result<C64> {
        let tau = self.tau();
        let t = tau.eval(z);
        let lap = tau.field().dz_dzbar(z)?;
        Ok(I * 0.5 * self.mu() * (t.conj() * lap - t * lap.conj()))
    }

    /// The exact 1-form `dφ`.
    pub fn gauge_one_form(&self) -> OneForm {
        let (a, b) = (self.clone(), self.clone());
        let nan = C64::new(f64::NAN, f64::NAN);
        OneForm::new(
            ScalarField::new(move |z| a.gauge_dphi_dz(z).unwrap_or(nan)),
            ScalarField::new(move |z| b.gauge_dphi_dz(z).map(|d| d.conj()).unwrap_or(nan)),
            Reality::Real,
        )
    }

    /// Complex value of `∫ dφ` along the chosen polyline, without checks.
    pub fn gauge_integral(&self, z: C64, path: PathChoice) -> Result<C64> {
        if self.mu() == 0.0 {
            // S = νz and B = ν, so dφ vanishes identically
            return Ok(C64::new(0.0, 0.0));
        }
        line_integral(&self.gauge_one_form(), &path.path(z), PATH_PANELS)
    }

    /// `φ(z)` with `φ(0) = 0`. `Both` fails when the two paths disagree by more
    /// than [`GAUGE_CLOSED_TOL`]; any path fails when `|Im φ|` exceeds
    /// [`GAUGE_IMAG_TOL`].
    pub fn gauge_phi(&self, z: C64, path: PathChoice) -> Result<f64> {
        let v = self.gauge_integral(z, path)?;
        if path == PathChoice::Both {
            let w = self.gauge_integral(z, PathChoice::ImagFirst)?;
            let gap = (v - w).norm();
            if gap > GAUGE_CLOSED_TOL {
                return Err(MafError::GaugeNotClosed(gap));
            }
        }
        if v.im.abs() > GAUGE_IMAG_TOL {
            return Err(MafError::GaugeConvention(v.im));
        }
        Ok(v.re)
    }

    /// `φ` as a real field with exact first and second derivatives.
    pub fn gauge_field(&self) -> ScalarField {
        let (a, b, c, d) = (self.clone(), self.clone(), self.clone(), self.clone());
        let nan = C64::new(f64::NAN, f64::NAN);
        ScalarField::new(move |z| {
            a.gauge_integral(z, PathChoice::RealFirst)
                .map(|v| C64::new(v.re, 0.0))
                .unwrap_or(nan)
        })
        .with_dz(move |z| b.gauge_dphi_dz(z).unwrap_or(nan))
        .with_dzbar(move |z| c.gauge_dphi_dz(z).map(|v| v.conj()).unwrap_or(nan))
        .with_dz_dzbar(move |z| d.gauge_dz_dzbar(z).unwrap_or(nan))
    }

    /// `e^{i·sign·φ}` with exact derivatives.
    pub fn gauge_phase_field(&self, sign: f64) -> ScalarField {
        let phi = self.gauge_field();
        let (p0, p1, p2, p3) = (phi.clone(), phi.clone(), phi.clone(), phi);
        let e = move |z: C64| cis(sign * p0.eval(z).re);
        let (e1, e2, e3) = (e.clone(), e.clone(), e.clone());
        let k = I * sign;
        ScalarField::new(e)
            .with_dz(move |z| k * p1.wirtinger(z).map(|d| d.0).unwrap_or_default() * e1(z))
            .with_dzbar(move |z| k * p2.wirtinger(z).map(|d| d.1).unwrap_or_default() * e2(z))
            .with_dz_dzbar(move |z| {
                let j = p3.jet(z).unwrap_or_default();
                (k * j.dz_dzbar + k * k * j.dz * j.dzbar) * e3(z)
            })
    }

    /// Path agreement and `|Im φ|` at the given points.
    pub fn gauge_closedness(&self, points: &[C64]) -> Result<CheckReport> {
        let mut acc = Residuals::new();
        let mut imag: f64 = 0.0;
        for &z in points {
            let a = self.gauge_integral(z, PathChoice::RealFirst)?;
            let b = self.gauge_integral(z, PathChoice::ImagFirst)?;
            imag = imag.max(a.im.abs()).max(b.im.abs());
            acc.push((a - b).norm());
        }
        Ok(acc
            .report("gauge_path_independence", GAUGE_CLOSED_TOL)
            .with_meta("max_abs_imag", imag)
            .with_meta("imag_ok", imag <= GAUGE_IMAG_TOL))
    }

    /// `|∮ dφ|` around each closed polygon.
    pub fn gauge_loop_residual(&self, loops: &[Vec<C64>]) -> Result<CheckReport> {
        let form = self.gauge_one_form();
        let mut acc = Residuals::new();
        for l in loops {
            let mut closed = l.clone();
            if let Some(&first) = l.first() {
                closed.push(first);
            }
            acc.push(line_integral(&form, &closed, PATH_PANELS)?.norm());
        }
        Ok(acc.report("gauge_loop_integral", GAUGE_CLOSED_TOL))
    }

    /// `W f = e^{iφ} f`.
    pub fn w_transform(&self, f: &ScalarField) -> ScalarField {
        self.gauge_phase_field(1.0).product(f)
    }

    /// `W⁻¹ f = e^{−iφ} f`.
    pub fn w_inverse(&self, f: &ScalarField) -> ScalarField {
        self.gauge_phase_field(-1.0).product(f)
    }

    /// `χ_τ(γ)` under the given convention.
    pub fn chi_tau(&self, g: &GroupElement, conv: ChiTauConvention) -> Result<C64> {
        let chi = self.chi_table().get(g)?;
        let origin = C64::new(0.0, 0.0);
        let correction = || -> Result<(f64, f64)> {
            let phi = self.gauge_phi(g.act(origin), PathChoice::RealFirst)?;
            let t0 = self.tau().eval(origin);
            let r = self.rho().apply(g).inverse().act(origin);
            Ok((phi, herm(t0, r).im))
        };
        Ok(match conv {
            ChiTauConvention::Derived => {
                let (phi, im) = correction()?;
                chi * cis(phi - self.mu() * im)
            }
            ChiTauConvention::DoubledMu => {
                let (phi, im) = correction()?;
                chi * cis(phi - 2.0 * self.mu() * im)
            }
            ChiTauConvention::DroppedCorrection => chi,
        })
    }

    /// `χ̂_τ(z; γ) = e^{i(φ(γz) − φ(z))} χ(γ) j^{ν−B}(γ, z) j^μ(ρ(γ), τ(z))`.
    pub fn chi_tau_hat(&self, z: C64, g: &GroupElement) -> Result<C64> {
        let phi = |w| self.gauge_phi(w, PathChoice::RealFirst);
        let chi = self.chi_table().get(g)?;
        Ok(cis(phi(g.act(z))? - phi(z)?)
            * chi
            * j_factor(self.nu() - self.b(), g, z)
            * j_factor(self.mu(), &self.rho().apply(g), self.tau().eval(z)))
    }

    /// z-independence of `χ̂_τ(·; γ)` over the grid: `max |χ̂(z) − χ̂(z₀)|`.
    pub fn chi_tau_hat_spread(&self, g: &GroupElement, grid: &Grid) -> Result<CheckReport> {
        let mut acc = Residuals::new();
        let mut first: Option<C64> = None;
        let mut modulus: f64 = 0.0;
        for z in grid.points() {
            let v = self.chi_tau_hat(z, g)?;
            modulus = modulus.max((v.norm() - 1.0).abs());
            let v0 = *first.get_or_insert(v);
            acc.push((v - v0).norm());
        }
        let v0 = first.unwrap_or(C64::new(1.0, 0.0));
        let derived = self.chi_tau(g, ChiTauConvention::Derived)?;
        Ok(acc
            .report("chi_tau_hat_spread", 1e-8)
            .with_meta("modulus_defect", modulus)
            .with_meta("chi_tau_hat", serde_json::json!([v0.re, v0.im]))
            .with_meta("chi_tau_gap", (v0 - derived).norm())
            .with_meta("g", serde_json::to_value(g).unwrap_or_default()))
    }

    /// `max_grid |e^{i(φ(γz) − φ(z))} J(γ, z) − χ_τ(γ) j^B(γ, z)|`.
    pub fn lifting_residual(&self, g: &GroupElement, grid: &Grid, conv: ChiTauConvention) -> Result<CheckReport> {
        let chi_tau = self.chi_tau(g, conv)?;
        let phi = |w| self.gauge_phi(w, PathChoice::RealFirst);
        let mut acc = Residuals::new();
        for z in grid.points() {
            let lhs = cis(phi(g.act(z))? - phi(z)?) * self.mixed_factor(g, z)?;
            let rhs = chi_tau * j_factor(self.b(), g, z);
            acc.push((lhs - rhs).norm());
        }
        Ok(acc
            .report("lifting", 1e-8)
            .with_meta("convention", serde_json::to_value(conv).unwrap_or_default())
            .with_meta("chi_tau", serde_json::json!([chi_tau.re, chi_tau.im]))
            .with_meta("g", serde_json::to_value(g).unwrap_or_default()))
    }

    /// `max_grid |Δf − e^{−iφ} Δ_B(e^{iφ} f)|`, the right side by finite
    /// differences. `b_override` replaces `B` for negative controls.
    pub fn intertwining_residual(&self, f: &ScalarField, grid: &Grid, b_override: Option<f64>) -> Result<CheckReport> {
        let b = b_override.unwrap_or(self.b());
        let lifted = self.w_transform(f).numeric();
        let back = self.gauge_phase_field(-1.0);
        let mut acc = Residuals::new();
        for z in grid.points() {
            let lhs = self.apply_mixed_laplacian(f, z)?;
            let rhs = back.eval(z) * super::apply_landau(b, &lifted, z)?;
            acc.push((lhs - rhs).norm());
        }
        Ok(acc.report("intertwining", 1e-5).with_meta("B", b))
    }
}
