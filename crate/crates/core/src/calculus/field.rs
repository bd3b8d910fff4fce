use std::fmt;
use std::sync::Arc;

use crate::error::{MafError, Result};
use crate::C64;

/// Default finite-difference step for first derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Second differences use a coarser step to keep roundoff small.
const SECOND_STEP_FACTOR: f64 = 10.0;

pub type FieldFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Complex-valued function of one complex variable.
///
/// Analytic derivatives are optional. When `dz_dzbar` is missing but `dz` is
/// present, the mixed derivative is obtained by differencing `dz` once.
#[derive(Clone)]
pub struct ScalarField {
    eval: FieldFn,
    dz: Option<FieldFn>,
    dzbar: Option<FieldFn>,
    dz_dzbar: Option<FieldFn>,
    fd_step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_dz", &self.dz.is_some())
            .field("analytic_dzbar", &self.dzbar.is_some())
            .field("analytic_dz_dzbar", &self.dz_dzbar.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

/// 5-point central first derivative along `dir` (a unit real or imaginary step).
pub(crate) fn diff1(f: &dyn Fn(C64) -> C64, z: C64, dir: C64, h: f64) -> C64 {
    let d = dir * h;
    (f(z - d * 2.0) - f(z - d) * 8.0 + f(z + d) * 8.0 - f(z + d * 2.0)) / (12.0 * h)
}

/// 5-point central second derivative along `dir`.
fn diff2(f: &dyn Fn(C64) -> C64, z: C64, dir: C64, h: f64) -> C64 {
    let d = dir * h;
    (-f(z - d * 2.0) + f(z - d) * 16.0 - f(z) * 30.0 + f(z + d) * 16.0 - f(z + d * 2.0))
        / (12.0 * h * h)
}

fn finite(context: &'static str, z: C64, v: C64) -> Result<C64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MafError::NonFinite { context, z })
    }
}

impl ScalarField {
    pub fn new(eval: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            dz: None,
            dzbar: None,
            dz_dzbar: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_dz(mut self, d: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.dz = Some(Arc::new(d));
        self
    }

    pub fn with_dzbar(mut self, d: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.dzbar = Some(Arc::new(d));
        self
    }

    pub fn with_dz_dzbar(mut self, d: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.dz_dzbar = Some(Arc::new(d));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "fd_step must be positive");
        self.fd_step = h;
        self
    }

    /// Same values, every derivative by finite differences.
    pub fn numeric(&self) -> Self {
        Self {
            eval: self.eval.clone(),
            dz: None,
            dzbar: None,
            dz_dzbar: None,
            fd_step: self.fd_step,
        }
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_analytic_first(&self) -> bool {
        self.dz.is_some() && self.dzbar.is_some()
    }

    pub fn has_analytic_second(&self) -> bool {
        self.dz_dzbar.is_some()
    }

    fn fully_analytic(&self) -> bool {
        self.has_analytic_first() && self.has_analytic_second()
    }

    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    pub fn try_eval(&self, z: C64) -> Result<C64> {
        finite("field", z, self.eval(z))
    }

    pub fn function(&self) -> FieldFn {
        self.eval.clone()
    }

    /// `(∂f, ∂̄f)` from the finite-difference stencil, ignoring analytic data.
    pub fn wirtinger_fd(&self, z: C64) -> Result<(C64, C64)> {
        self.try_eval(z)?;
        let f = |w: C64| self.eval(w);
        let fx = diff1(&f, z, C64::new(1.0, 0.0), self.fd_step);
        let fy = diff1(&f, z, C64::new(0.0, 1.0), self.fd_step);
        let i = crate::I;
        Ok((
            finite("wirtinger", z, (fx - i * fy) * 0.5)?,
            finite("wirtinger", z, (fx + i * fy) * 0.5)?,
        ))
    }

    /// `(∂f, ∂̄f)`, analytic where available.
    pub fn wirtinger(&self, z: C64) -> Result<(C64, C64)> {
        match (&self.dz, &self.dzbar) {
            (Some(d), Some(db)) => Ok((finite("dz", z, d(z))?, finite("dzbar", z, db(z))?)),
            _ => {
                let (d_fd, db_fd) = self.wirtinger_fd(z)?;
                let d = match &self.dz {
                    Some(d) => finite("dz", z, d(z))?,
                    None => d_fd,
                };
                let db = match &self.dzbar {
                    Some(db) => finite("dzbar", z, db(z))?,
                    None => db_fd,
                };
                Ok((d, db))
            }
        }
    }

    /// `∂∂̄f = ¼Δf` by the second-difference stencil on the values.
    pub fn dz_dzbar_fd(&self, z: C64) -> Result<C64> {
        let f = |w: C64| self.eval(w);
        let h = self.fd_step * SECOND_STEP_FACTOR;
        let fxx = diff2(&f, z, C64::new(1.0, 0.0), h);
        let fyy = diff2(&f, z, C64::new(0.0, 1.0), h);
        finite("dz_dzbar", z, (fxx + fyy) * 0.25)
    }

    /// `∂∂̄f`, analytic if given, else `∂̄` of an analytic `∂f`, else the stencil.
    pub fn dz_dzbar(&self, z: C64) -> Result<C64> {
        if let Some(d) = &self.dz_dzbar {
            return finite("dz_dzbar", z, d(z));
        }
        if let Some(d) = &self.dz {
            let g = |w: C64| d(w);
            let gx = diff1(&g, z, C64::new(1.0, 0.0), self.fd_step);
            let gy = diff1(&g, z, C64::new(0.0, 1.0), self.fd_step);
            return finite("dz_dzbar", z, (gx + crate::I * gy) * 0.5);
        }
        self.dz_dzbar_fd(z)
    }

    /// Flat Laplacian `4∂∂̄f`.
    pub fn laplacian(&self, z: C64) -> Result<C64> {
        Ok(self.dz_dzbar(z)? * 4.0)
    }

    /// Value, `∂`, `∂̄` and `∂∂̄` in one call.
    pub fn jet(&self, z: C64) -> Result<Jet> {
        let (dz, dzbar) = self.wirtinger(z)?;
        Ok(Jet {
            f: self.try_eval(z)?,
            dz,
            dzbar,
            dz_dzbar: self.dz_dzbar(z)?,
        })
    }

    // ---- constructors -------------------------------------------------

    pub fn constant(c: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self::new(move |_| c)
            .with_dz(move |_| zero)
            .with_dzbar(move |_| zero)
            .with_dz_dzbar(move |_| zero)
    }

    /// `c·z + d·z̄ + e`.
    pub fn affine(c: C64, d: C64, e: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self::new(move |z| c * z + d * z.conj() + e)
            .with_dz(move |_| c)
            .with_dzbar(move |_| d)
            .with_dz_dzbar(move |_| zero)
    }

    pub fn z() -> Self {
        Self::affine(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn zbar() -> Self {
        Self::affine(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// `|z|²`.
    pub fn abs2() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new(|z| C64::new(z.norm_sqr(), 0.0))
            .with_dz(|z: C64| z.conj())
            .with_dzbar(|z| z)
            .with_dz_dzbar(move |_| one)
    }

    /// `exp(p·z + q·z̄ + r)`.
    pub fn exp_linear(p: C64, q: C64, r: C64) -> Self {
        let e = move |z: C64| (p * z + q * z.conj() + r).exp();
        Self::new(e)
            .with_dz(move |z| p * e(z))
            .with_dzbar(move |z| q * e(z))
            .with_dz_dzbar(move |z| p * q * e(z))
    }

    /// `z^p z̄^q e^{−c|z|²}` with exact derivatives.
    pub fn gaussian_monomial(p: u32, q: u32, c: f64) -> Self {
        let mono = move |z: C64, p: u32, q: u32| -> C64 {
            z.powu(p) * z.conj().powu(q)
        };
        let m = move |z: C64| mono(z, p, q);
        let m_z = move |z: C64| {
            if p == 0 {
                C64::new(0.0, 0.0)
            } else {
                mono(z, p - 1, q) * p as f64
            }
        };
        let m_zb = move |z: C64| {
            if q == 0 {
                C64::new(0.0, 0.0)
            } else {
                mono(z, p, q - 1) * q as f64
            }
        };
        let m_zzb = move |z: C64| {
            if p == 0 || q == 0 {
                C64::new(0.0, 0.0)
            } else {
                mono(z, p - 1, q - 1) * (p * q) as f64
            }
        };
        let g = move |z: C64| (-c * z.norm_sqr()).exp();
        Self::new(move |z| m(z) * g(z))
            .with_dz(move |z| (m_z(z) - m(z) * z.conj() * c) * g(z))
            .with_dzbar(move |z| (m_zb(z) - m(z) * z * c) * g(z))
            .with_dz_dzbar(move |z| {
                let r2 = z.norm_sqr();
                (m_zzb(z) - m_z(z) * z * c - m_zb(z) * z.conj() * c
                    + m(z) * (c * c * r2 - c))
                    * g(z)
            })
    }

    // ---- combinators --------------------------------------------------

    /// Pointwise product; analytic derivatives survive when both factors
    /// carry a full analytic jet.
    pub fn product(&self, other: &ScalarField) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let step = self.fd_step.min(other.fd_step);
        let mut out = Self::new({
            let (a, b) = (a.clone(), b.clone());
            move |z| a.eval(z) * b.eval(z)
        })
        .with_fd_step(step);
        if a.fully_analytic() && b.fully_analytic() {
            let (a1, b1) = (a.clone(), b.clone());
            let (a2, b2) = (a.clone(), b.clone());
            let (a3, b3) = (a, b);
            out = out
                .with_dz(move |z| {
                    let (ad, _) = a1.wirtinger(z).unwrap_or_default();
                    let (bd, _) = b1.wirtinger(z).unwrap_or_default();
                    ad * b1.eval(z) + a1.eval(z) * bd
                })
                .with_dzbar(move |z| {
                    let (_, ad) = a2.wirtinger(z).unwrap_or_default();
                    let (_, bd) = b2.wirtinger(z).unwrap_or_default();
                    ad * b2.eval(z) + a2.eval(z) * bd
                })
                .with_dz_dzbar(move |z| {
                    let ja = a3.jet(z).unwrap_or_else(|_| Jet::nan());
                    let jb = b3.jet(z).unwrap_or_else(|_| Jet::nan());
                    ja.dz_dzbar * jb.f + ja.dz * jb.dzbar + ja.dzbar * jb.dz + ja.f * jb.dz_dzbar
                });
        }
        out
    }

    /// `c·f`, keeping analytic derivatives.
    pub fn scale(&self, c: C64) -> Self {
        let a = self.clone();
        let mut out = Self::new({
            let a = a.clone();
            move |z| a.eval(z) * c
        })
        .with_fd_step(self.fd_step);
        if let Some(d) = a.dz.clone() {
            out.dz = Some(Arc::new(move |z| d(z) * c));
        }
        if let Some(d) = a.dzbar.clone() {
            out.dzbar = Some(Arc::new(move |z| d(z) * c));
        }
        if let Some(d) = a.dz_dzbar.clone() {
            out.dz_dzbar = Some(Arc::new(move |z| d(z) * c));
        }
        out
    }

    /// Pointwise sum; an analytic derivative survives when both summands
    /// have it.
    pub fn add(&self, other: &ScalarField) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let mut out = Self::new({
            let (a, b) = (a.clone(), b.clone());
            move |z| a.eval(z) + b.eval(z)
        })
        .with_fd_step(self.fd_step.min(other.fd_step));
        if let (Some(x), Some(y)) = (a.dz.clone(), b.dz.clone()) {
            out.dz = Some(Arc::new(move |z| x(z) + y(z)));
        }
        if let (Some(x), Some(y)) = (a.dzbar.clone(), b.dzbar.clone()) {
            out.dzbar = Some(Arc::new(move |z| x(z) + y(z)));
        }
        if let (Some(x), Some(y)) = (a.dz_dzbar.clone(), b.dz_dzbar.clone()) {
            out.dz_dzbar = Some(Arc::new(move |z| x(z) + y(z)));
        }
        out
    }

    /// Pointwise complex conjugate: `∂(f̄) = conj(∂̄f)`.
    pub fn conj(&self) -> Self {
        let a = self.clone();
        let mut out = Self::new({
            let a = a.clone();
            move |z| a.eval(z).conj()
        })
        .with_fd_step(self.fd_step);
        if let Some(d) = a.dzbar.clone() {
            out.dz = Some(Arc::new(move |z| d(z).conj()));
        }
        if let Some(d) = a.dz.clone() {
            out.dzbar = Some(Arc::new(move |z| d(z).conj()));
        }
        if let Some(d) = a.dz_dzbar.clone() {
            out.dz_dzbar = Some(Arc::new(move |z| d(z).conj()));
        }
        out
    }

    /// `f(g(z))` for an arbitrary map; derivatives by finite differences.
    pub fn compose_map(&self, map: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        let a = self.clone();
        Self::new(move |z| a.eval(map(z))).with_fd_step(self.fd_step)
    }
}

/// Value and derivatives of a field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub f: C64,
    pub dz: C64,
    pub dzbar: C64,
    pub dz_dzbar: C64,
}

impl Jet {
    fn nan() -> Self {
        let n = C64::new(f64::NAN, f64::NAN);
        Self { f: n, dz: n, dzbar: n, dz_dzbar: n }
    }
}

/// Free-function form of [`ScalarField::wirtinger`].
pub fn wirtinger(f: &ScalarField, z: C64) -> Result<(C64, C64)> {
    f.wirtinger(z)
}
