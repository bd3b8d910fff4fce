use super::field::ScalarField;
use super::grid::Rect;
use super::quadrature::{gauss_legendre, quad2d};
use crate::error::{MafError, Result};
use crate::report::{CheckReport, Residuals};
use crate::C64;

/// `dz∧dz̄ = DZ_DZBAR_AREA · dx∧dy`.
pub const DZ_DZBAR_AREA: C64 = C64::new(0.0, -2.0);

/// Expected conjugation symmetry between the two coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reality {
    /// `c_dz̄ = conj(c_dz)`.
    Real,
    /// `c_dz̄ = −conj(c_dz)`, the shape of a magnetic potential in this basis.
    Imaginary,
    General,
}

/// `c_dz dz + c_dz̄ dz̄`.
#[derive(Debug, Clone)]
pub struct OneForm {
    pub coeff_dz: ScalarField,
    pub coeff_dzbar: ScalarField,
    pub reality: Reality,
}

impl OneForm {
    pub fn new(coeff_dz: ScalarField, coeff_dzbar: ScalarField, reality: Reality) -> Self {
        Self { coeff_dz, coeff_dzbar, reality }
    }

    pub fn zero() -> Self {
        let z = ScalarField::constant(C64::new(0.0, 0.0));
        Self::new(z.clone(), z, Reality::Real)
    }

    /// `df = ∂f dz + ∂̄f dz̄` (derivatives of `f` by its own rules).
    pub fn exact(f: &ScalarField) -> Self {
        let (a, b) = (f.clone(), f.clone());
        Self::new(
            ScalarField::new(move |z| a.wirtinger(z).map(|d| d.0).unwrap_or(C64::new(f64::NAN, 0.0))),
            ScalarField::new(move |z| b.wirtinger(z).map(|d| d.1).unwrap_or(C64::new(f64::NAN, 0.0))),
            Reality::General,
        )
    }

    /// Landau gauge `−(ν/2)(z̄ dz − z dz̄)`.
    pub fn landau(nu: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        let h = C64::new(0.5 * nu, 0.0);
        Self::new(
            ScalarField::affine(zero, -h, zero),
            ScalarField::affine(h, zero, zero),
            Reality::Imaginary,
        )
    }

    /// Pairing with a tangent vector `v` at `z`: `c_dz·v + c_dz̄·v̄`.
    pub fn pair(&self, z: C64, v: C64) -> C64 {
        self.coeff_dz.eval(z) * v + self.coeff_dzbar.eval(z) * v.conj()
    }

    /// Residual of the declared conjugation symmetry at the given points.
    pub fn reality_residual(&self, points: impl IntoIterator<Item = C64>, tol: f64) -> CheckReport {
        let mut acc = Residuals::new();
        for z in points {
            let (a, b) = (self.coeff_dz.eval(z), self.coeff_dzbar.eval(z));
            let r = match self.reality {
                Reality::Real => (b - a.conj()).norm(),
                Reality::Imaginary => (b + a.conj()).norm(),
                Reality::General => 0.0,
            };
            acc.push(r);
        }
        acc.report("one_form_reality", tol)
            .with_meta("reality", format!("{:?}", self.reality))
    }
}

/// `coeff · dz∧dz̄`.
#[derive(Debug, Clone)]
pub struct TwoForm {
    pub coeff: ScalarField,
}

impl TwoForm {
    /// `∫∫_R ω` with `dz∧dz̄ = −2i dx dy`.
    pub fn flux(&self, rect: &Rect, n: usize) -> C64 {
        quad2d(|z| self.coeff.eval(z), rect, n) * DZ_DZBAR_AREA
    }
}

/// `d(a dz + b dz̄) = (∂b − ∂̄a) dz∧dz̄`.
pub fn exterior_derivative(omega: &OneForm) -> TwoForm {
    let (a, b) = (omega.coeff_dz.clone(), omega.coeff_dzbar.clone());
    TwoForm {
        coeff: ScalarField::new(move |z| match (b.wirtinger(z), a.wirtinger(z)) {
            (Ok((db, _)), Ok((_, dab))) => db - dab,
            _ => C64::new(f64::NAN, f64::NAN),
        }),
    }
}

/// `∫_path ω` along a polyline, `n_sub` Gauss-Legendre panels (8 nodes) per segment.
pub fn line_integral(omega: &OneForm, path: &[C64], n_sub: usize) -> Result<C64> {
    if n_sub == 0 {
        return Err(MafError::InvalidInput("line_integral needs n_sub >= 1".into()));
    }
    let rule = gauss_legendre(8);
    let mut total = C64::new(0.0, 0.0);
    for seg in path.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let v = q - p;
        if v.norm() == 0.0 {
            continue;
        }
        let h = 1.0 / n_sub as f64;
        for s in 0..n_sub {
            let t0 = s as f64 * h;
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let t = t0 + 0.5 * h * (x + 1.0);
                total += omega.pair(p + v * t, v) * (0.5 * h * w);
            }
        }
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(MafError::NonFinite {
            context: "line_integral",
            z: path.last().copied().unwrap_or_default(),
        })
    }
}
