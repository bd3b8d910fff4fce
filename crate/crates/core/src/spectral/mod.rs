//! Landau levels, strip eigenfunctions and projector kernels.
//!
//! All eigenfunctions here are in the flat `L²(ℂ, dλ)` picture used by
//! [`MagneticSystem::apply_mixed_laplacian`]. The gauge enters as the factor
//! `e^{-iφ}`, which carries Landau eigenfunctions to eigenfunctions of the mixed
//! operator. The `_weighted` variants drop the Gaussian `e^{-B|z|²/2}` so they
//! pair with [`WeightedInnerProduct`].

mod inner;
mod kernel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use inner::{weighted_inner_product, WeightedInnerProduct};
pub use kernel::{
    adjudicate_laguerre_scale, hermiticity_residual, kernel, kernel_eigen_residual, kernel_invariance_residual,
    landau_kernel, project, LaguerreScale, Projector, ScaleVerdict, TRUNCATION_TAIL,
};

use crate::calculus::{QuadGrid, Rect, ScalarField};
use crate::magnetics::{ChiTauConvention, MagneticSystem};
use crate::report::Residuals;
use crate::{cis, CheckReport, GroupElement, MafError, Result, C64, I};

/// Relative tolerance for the level checks.
pub const LEVEL_TOL: f64 = 1e-4;

fn index(k: i64, what: &str) -> Result<usize> {
    usize::try_from(k).map_err(|_| MafError::InvalidInput(format!("{what} must be non-negative, got {k}")))
}

fn positive_b(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(MafError::NonPositiveField(b))
    }
}

/// `H_0, …, H_m` at `x` (physicists' convention).
fn hermite_table(m: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0, 2.0 * x];
    for j in 1..m {
        let next = 2.0 * x * h[j] - 2.0 * j as f64 * h[j - 1];
        h.push(next);
    }
    h.truncate(m + 1);
    h
}

/// Physicists' Hermite polynomial `H_m(x)`.
pub fn hermite(m: i64, x: f64) -> Result<f64> {
    let m = index(m, "Hermite degree")?;
    Ok(hermite_table(m, x)[m])
}

/// `L_0(x), …, L_k(x)`.
pub(crate) fn laguerre_table(k: usize, x: f64) -> Vec<f64> {
    let mut l = vec![1.0, 1.0 - x];
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * l[j] - jf * l[j - 1]) / (jf + 1.0);
        l.push(next);
    }
    l.truncate(k + 1);
    l
}

/// Laguerre polynomial `L_k = L_k^0`.
pub fn laguerre(k: i64, x: f64) -> Result<f64> {
    let k = index(k, "Laguerre degree")?;
    Ok(laguerre_table(k, x)[k])
}

/// `λ_k = -2B(2k+1)`.
pub fn landau_level(b: f64, k: i64) -> Result<f64> {
    positive_b(b)?;
    let k = index(k, "level")?;
    Ok(-2.0 * b * (2 * k + 1) as f64)
}

/// Index set and parameters of the strip basis `ψ_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBasis {
    pub b: f64,
    pub alpha: f64,
    pub m_max: usize,
    pub n_max: usize,
}

impl SpectralBasis {
    pub fn new(b: f64, alpha: f64, m_max: usize, n_max: usize) -> Result<Self> {
        positive_b(b)?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(MafError::InvalidInput(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        Ok(Self { b, alpha, m_max, n_max })
    }

    /// Basis matched to a system whose Γ contains the unit translation; `α`
    /// is read off the lifted character, `χ_τ([1,1]) = e^{2πiα}`.
    pub fn for_system(sys: &MagneticSystem, m_max: usize, n_max: usize) -> Result<Self> {
        let alpha = strip_alpha(sys)?;
        Self::new(sys.b(), alpha, m_max, n_max)
    }

    fn check(&self, m: usize, n: i64) -> Result<()> {
        if m > self.m_max || n.unsigned_abs() as usize > self.n_max {
            return Err(MafError::InvalidInput(format!(
                "index (m={m}, n={n}) outside basis range m ≤ {}, |n| ≤ {}",
                self.m_max, self.n_max
            )));
        }
        Ok(())
    }

    /// Gaussian centre `Im z = -π(n+α)/B` of `|ψ_{m,n}|`.
    pub fn centre(&self, n: i64) -> f64 {
        -PI * (n as f64 + self.alpha) / self.b
    }

    /// One period `[0, 1]` in `x`, `±half_width/√B` around the centre in `y`.
    pub fn strip_cell(&self, n: i64, half_width: f64) -> Rect {
        let c = self.centre(n);
        let h = half_width / self.b.sqrt();
        Rect::new(0.0, 1.0, c - h, c + h)
    }
}

/// `α ∈ [0, 1)` with `χ_τ([1,1]) = e^{2πiα}`.
pub fn strip_alpha(sys: &MagneticSystem) -> Result<f64> {
    let unit = GroupElement::translation(C64::new(1.0, 0.0));
    if sys.chi_table().get(&unit).is_err() {
        return Err(MafError::Precondition("Γ does not contain the unit translation [1,1]".into()));
    }
    let chi = sys.chi_tau(&unit, ChiTauConvention::Derived)?;
    let a = chi.arg() / (2.0 * PI);
    let a = a.rem_euclid(1.0);
    Ok(if a >= 1.0 - 1e-14 { 0.0 } else { a })
}

/// Landau-gauge strip function
/// `e^{-B|z|²/2 + (B/2)z² + 2πi(n+α)z - π²(n+α)²/B} H_m(√(2B) y + √(2/B) π(n+α))`
/// with exact Wirtinger derivatives.
pub fn landau_strip_field(b: f64, alpha: f64, m: usize, n: i64) -> ScalarField {
    let k = n as f64 + alpha;
    let sb = (2.0 * b).sqrt();
    let shift = (2.0 / b).sqrt() * PI * k;
    let parts = move |z: C64| {
        let a = -0.5 * b * z.norm_sqr() + 0.5 * b * z * z + 2.0 * PI * I * k * z - PI * PI * k * k / b;
        let s = sb * z.im + shift;
        let h = hermite_table(m, s);
        let hm = h[m];
        let d1 = if m >= 1 { 2.0 * m as f64 * h[m - 1] } else { 0.0 };
        let d2 = if m >= 2 { 4.0 * (m * (m - 1)) as f64 * h[m - 2] } else { 0.0 };
        (a.exp(), hm, d1, d2)
    };
    // ∂a = -Bz̄/2 + Bz + 2πik, ∂̄a = -Bz/2, ∂∂̄a = -B/2; ∂y = -i/2, ∂̄y = i/2
    let da = move |z: C64| -0.5 * b * z.conj() + b * z + 2.0 * PI * I * k;
    let dba = move |z: C64| -0.5 * b * z;
    let dh = move |d1: f64| -0.5 * I * sb * d1;
    let dbh = move |d1: f64| 0.5 * I * sb * d1;
    ScalarField::new(move |z| {
        let (e, h, _, _) = parts(z);
        e * h
    })
    .with_dz(move |z| {
        let (e, h, d1, _) = parts(z);
        e * (da(z) * h + dh(d1))
    })
    .with_dzbar(move |z| {
        let (e, h, d1, _) = parts(z);
        e * (dba(z) * h + dbh(d1))
    })
    .with_dz_dzbar(move |z| {
        let (e, h, d1, d2) = parts(z);
        let inner = dba(z) * h + dbh(d1);
        let ddh = C64::new(0.5 * b * d2, 0.0);
        e * (da(z) * inner - 0.5 * b * h + dba(z) * dh(d1) + ddh)
    })
}

/// `ψ_{m,n}` in the flat picture, as a field with exact derivatives.
pub fn strip_field(basis: &SpectralBasis, sys: &MagneticSystem, m: usize, n: i64) -> Result<ScalarField> {
    basis.check(m, n)?;
    positive_b(basis.b)?;
    let landau = landau_strip_field(basis.b, basis.alpha, m, n);
    Ok(sys.gauge_phase_field(-1.0).product(&landau))
}

/// `ψ_{m,n}(z)` in the flat picture.
pub fn strip_eigenfunction(basis: &SpectralBasis, sys: &MagneticSystem, m: usize, n: i64, z: C64) -> Result<C64> {
    basis.check(m, n)?;
    positive_b(basis.b)?;
    let phi = sys.gauge_phi(z, crate::magnetics::PathChoice::RealFirst)?;
    Ok(cis(-phi) * landau_strip_field(basis.b, basis.alpha, m, n).try_eval(z)?)
}

/// `ψ_{m,n}(z)` without the Gaussian `e^{-B|z|²/2}`, for the weighted product.
pub fn strip_eigenfunction_weighted(
    basis: &SpectralBasis,
    sys: &MagneticSystem,
    m: usize,
    n: i64,
    z: C64,
) -> Result<C64> {
    Ok(strip_eigenfunction(basis, sys, m, n, z)? * (0.5 * basis.b * z.norm_sqr()).exp())
}

/// Level-`q` eigenfunction `e^{-iφ} z̄^q e^{-B|z|²/2}` of the mixed operator.
pub fn landau_eigenfunction(sys: &MagneticSystem, q: u32) -> ScalarField {
    let g = ScalarField::gaussian_monomial(0, q, 0.5 * sys.b());
    sys.gauge_phase_field(-1.0).product(&g)
}

/// Pointwise relative residual `max |Δψ - λψ| / max |ψ|` over `points`.
pub fn eigen_residual(sys: &MagneticSystem, f: &ScalarField, lambda: f64, points: &[C64]) -> Result<CheckReport> {
    let mut acc = Residuals::new();
    let mut scale = 0.0f64;
    for &z in points {
        let v = f.try_eval(z)?;
        scale = scale.max(v.norm());
        acc.push((sys.apply_mixed_laplacian(f, z)? - v * lambda).norm());
    }
    let mut r = acc.report("eigen_equation", LEVEL_TOL);
    if scale > 0.0 {
        r.max_residual /= scale;
        r.mean_residual /= scale;
    }
    Ok(r.with_tol(LEVEL_TOL).with_meta("lambda", lambda))
}

/// Rayleigh quotient `⟨Δψ, ψ⟩ / ⟨ψ, ψ⟩` over one strip cell, with derivatives
/// taken by finite differences.
pub fn rayleigh_quotient(basis: &SpectralBasis, sys: &MagneticSystem, m: usize, n: i64, order: usize) -> Result<f64> {
    let f = strip_field(basis, sys, m, n)?.numeric();
    let grid = QuadGrid::with_panel_width(&basis.strip_cell(n, 7.0), 1.0, order);
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for (&z, &w) in grid.nodes.iter().zip(&grid.weights) {
        let v = f.try_eval(z)?;
        num += sys.apply_mixed_laplacian(&f, z)? * v.conj() * w;
        den += v.norm_sqr() * w;
    }
    if den.is_nan() || den <= 0.0 {
        return Err(MafError::NonFinite { context: "rayleigh quotient norm", z: C64::new(den, 0.0) });
    }
    Ok(num.re / den)
}

/// Compares the finite-difference Rayleigh quotient of `ψ_{m,n}` with
/// `λ_m = -2B(2m+1)` and records which level it matches.
pub fn level_check(basis: &SpectralBasis, sys: &MagneticSystem, m: usize, n: i64) -> Result<CheckReport> {
    let rq = rayleigh_quotient(basis, sys, m, n, 8)?;
    let expected = landau_level(basis.b, m as i64)?;
    let matched = ((-rq / (2.0 * basis.b) - 1.0) / 2.0).round().max(0.0) as u64;
    let rel = ((rq - expected) / expected).abs();
    Ok(CheckReport::scalar(format!("landau_level[m={m},n={n}]"), rel, LEVEL_TOL)
        .with_meta("rayleigh_quotient", rq)
        .with_meta("expected", expected)
        .with_meta("matched_level", matched)
        .with_meta("level_index", "m"))
}

/// `(k, λ_k)` for `k = 0..=kmax`.
pub fn spectrum(b: f64, kmax: usize) -> Result<Vec<(usize, f64)>> {
    (0..=kmax).map(|k| Ok((k, landau_level(b, k as i64)?))).collect()
}
