//! The `ℂⁿ` layer: `U(n)⋉ℂⁿ`, equivariant maps `τ: ℂⁿ → ℂⁿ`, the potential
//! `θ = -½ Σ_ℓ {ν(z̄_ℓ dz_ℓ - z_ℓ dz̄_ℓ) + μ(τ̄_ℓ dτ_ℓ - τ_ℓ dτ̄_ℓ)}` and two
//! constant-field tests.
//!
//! The per-component test looks at the determinants `A, B` and the moduli
//! differences `F` of each `τ_ℓ` separately. The direct test differentiates
//! `θ` numerically and checks that every coefficient of `dθ` is constant. The
//! two can disagree when contributions from different components cancel in
//! the sum, and [`ConstantFieldVerdict::agreement`] records whether they did.

mod criterion;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use criterion::{
    constant_field_test, determinant_coeffs, two_form_coeffs, ConstantFieldVerdict, DeterminantCoeffs, TwoFormCoeffs,
};

use crate::calculus::diff1;
use crate::calculus::DEFAULT_FD_STEP;
use crate::equivariant::AffineTau;
use crate::report::Residuals;
use crate::{CheckReport, MafError, Result, C64, I};

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Unitarity tolerance for `A*A = 1`.
pub const UNITARY_TOL: f64 = 1e-10;

pub type PointN = DVector<C64>;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(MafError::InvalidInput(format!("dimension must be between 1 and {MAX_DIM}, got {n}")))
    }
}

fn unitarity_defect(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    max_abs(&(a.adjoint() * a - DMatrix::<C64>::identity(n, n)))
}

/// Largest entry modulus.
pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `[A, b] ∈ U(n)⋉ℂⁿ` acting by `z ↦ Az + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElementN {
    a: DMatrix<C64>,
    b: PointN,
}

impl GroupElementN {
    pub fn new(a: DMatrix<C64>, b: PointN) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n {
            return Err(MafError::InvalidInput(format!(
                "shape mismatch: A is {}×{}, b has length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        let defect = unitarity_defect(&a);
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(MafError::InvalidInput(format!("A is not unitary (defect {defect:e})")));
        }
        Ok(Self { a, b })
    }

    pub fn identity(n: usize) -> Self {
        Self { a: DMatrix::identity(n, n), b: DVector::zeros(n) }
    }

    /// Haar-like unitary part from a QR factorisation, translation in `[-2, 2]`.
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = m.qr().q();
        let b = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        Self { a: q, b }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b(&self) -> &PointN {
        &self.b
    }

    pub fn act(&self, z: &PointN) -> PointN {
        &self.a * z + &self.b
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { a: &self.a * &other.a, b: &self.a * &other.b + &self.b }
    }

    pub fn inverse(&self) -> Self {
        let ai = self.a.adjoint();
        let b = -(&ai * &self.b);
        Self { a: ai, b }
    }
}

/// `z^p z̄^q` with a coefficient; exponent vectors shorter than `n` are
/// padded with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: C64,
    #[serde(default)]
    pub z: Vec<u32>,
    #[serde(default)]
    pub zbar: Vec<u32>,
}

impl Monomial {
    fn power(v: C64, p: u32) -> C64 {
        v.powu(p)
    }

    fn exp(v: &[u32], k: usize) -> u32 {
        v.get(k).copied().unwrap_or(0)
    }

    fn eval(&self, z: &PointN) -> C64 {
        let mut acc = self.coeff;
        for (k, zk) in z.iter().enumerate() {
            acc *= Self::power(*zk, Self::exp(&self.z, k)) * Self::power(zk.conj(), Self::exp(&self.zbar, k));
        }
        acc
    }

    /// `∂_{z_k}` (`bar = false`) or `∂_{z̄_k}` (`bar = true`).
    fn derivative(&self, z: &PointN, k: usize, bar: bool) -> C64 {
        let p = if bar { Self::exp(&self.zbar, k) } else { Self::exp(&self.z, k) };
        if p == 0 {
            return zero();
        }
        let mut acc = self.coeff * p as f64;
        for (j, zj) in z.iter().enumerate() {
            let (mut pz, mut pb) = (Self::exp(&self.z, j), Self::exp(&self.zbar, j));
            if j == k {
                if bar {
                    pb -= 1;
                } else {
                    pz -= 1;
                }
            }
            acc *= Self::power(*zj, pz) * Self::power(zj.conj(), pb);
        }
        acc
    }
}

/// Descriptor of `τ: ℂⁿ → ℂⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauN {
    Identity,
    /// `τ_ℓ = z̄_ℓ`
    Conjugate,
    /// `τ = Uz` with `U` unitary, rows as `[[re, im], …]`.
    Linear {
        #[serde(rename = "U")]
        u: Vec<Vec<C64>>,
    },
    /// One monomial list per component.
    Polynomial { components: Vec<Vec<Monomial>> },
}

/// Declared `ρ` for the built-in descriptors.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoN {
    Identity,
    /// `[A, b] ↦ [Ā, b̄]`
    Conjugate,
    /// `[A, b] ↦ [UAU*, Ub]`
    ConjugateBy(DMatrix<C64>),
}

impl RhoN {
    pub fn apply(&self, g: &GroupElementN) -> GroupElementN {
        match self {
            RhoN::Identity => g.clone(),
            RhoN::Conjugate => GroupElementN { a: g.a.map(|v| v.conj()), b: g.b.map(|v| v.conj()) },
            RhoN::ConjugateBy(u) => GroupElementN { a: u * &g.a * u.adjoint(), b: u * &g.b },
        }
    }
}

/// `τ` with exact Wirtinger derivatives in all `2n` directions.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantMapN {
    n: usize,
    descriptor: TauN,
    components: Vec<Vec<Monomial>>,
}

impl EquivariantMapN {
    pub fn new(n: usize, descriptor: TauN) -> Result<Self> {
        check_dim(n)?;
        let unit = |k: usize, bar: bool| {
            let mut e = vec![0; n];
            e[k] = 1;
            let (z, zbar) = if bar { (vec![], e) } else { (e, vec![]) };
            Monomial { coeff: C64::new(1.0, 0.0), z, zbar }
        };
        let components = match &descriptor {
            TauN::Identity => (0..n).map(|l| vec![unit(l, false)]).collect(),
            TauN::Conjugate => (0..n).map(|l| vec![unit(l, true)]).collect(),
            TauN::Linear { u } => {
                let m = Self::matrix(n, u)?;
                let defect = unitarity_defect(&m);
                if defect.is_nan() || defect > UNITARY_TOL {
                    return Err(MafError::InvalidInput(format!("U is not unitary (defect {defect:e})")));
                }
                (0..n)
                    .map(|l| {
                        (0..n)
                            .filter(|&j| m[(l, j)] != zero())
                            .map(|j| Monomial { coeff: m[(l, j)], ..unit(j, false) })
                            .collect()
                    })
                    .collect()
            }
            TauN::Polynomial { components } => {
                if components.len() != n {
                    return Err(MafError::InvalidInput(format!(
                        "polynomial map has {} components, expected {n}",
                        components.len()
                    )));
                }
                for m in components.iter().flatten() {
                    if m.z.len() > n || m.zbar.len() > n {
                        return Err(MafError::InvalidInput("monomial exponent vector longer than n".into()));
                    }
                }
                components.clone()
            }
        };
        Ok(Self { n, descriptor, components })
    }

    fn matrix(n: usize, rows: &[Vec<C64>]) -> Result<DMatrix<C64>> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(MafError::InvalidInput(format!("U must be {n}×{n}")));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, TauN::Identity)
    }

    pub fn conjugate(n: usize) -> Result<Self> {
        Self::new(n, TauN::Conjugate)
    }

    pub fn linear(u: &DMatrix<C64>) -> Result<Self> {
        let rows = (0..u.nrows()).map(|i| u.row(i).iter().copied().collect()).collect();
        Self::new(u.nrows(), TauN::Linear { u: rows })
    }

    /// One-dimensional affine `τ = cz + dz̄ + β`.
    pub fn from_affine(t: &AffineTau) -> Result<Self> {
        let mono = |coeff, z: Vec<u32>, zbar: Vec<u32>| Monomial { coeff, z, zbar };
        let comp = vec![mono(t.c, vec![1], vec![]), mono(t.d, vec![], vec![1]), mono(t.beta, vec![], vec![])];
        Self::new(1, TauN::Polynomial { components: vec![comp] })
    }

    /// `τ = Uz` for the real rotation by `angle` in the first two coordinates.
    pub fn rotation(angle: f64) -> Result<Self> {
        let (c, s) = (C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0));
        Self::linear(&DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn descriptor(&self) -> &TauN {
        &self.descriptor
    }

    /// `ρ` making `τ` equivariant, for descriptors that determine one.
    pub fn declared_rho(&self) -> Option<RhoN> {
        match &self.descriptor {
            TauN::Identity => Some(RhoN::Identity),
            TauN::Conjugate => Some(RhoN::Conjugate),
            TauN::Linear { u } => Self::matrix(self.n, u).ok().map(RhoN::ConjugateBy),
            TauN::Polynomial { .. } => None,
        }
    }

    fn check_point(&self, z: &PointN) -> Result<()> {
        if z.len() != self.n {
            return Err(MafError::InvalidInput(format!("point has length {}, expected {}", z.len(), self.n)));
        }
        Ok(())
    }

    pub fn eval(&self, z: &PointN) -> Result<PointN> {
        self.check_point(z)?;
        Ok(DVector::from_fn(self.n, |l, _| self.components[l].iter().map(|m| m.eval(z)).sum()))
    }

    /// `([∂τ_ℓ/∂z_k], [∂τ_ℓ/∂z̄_k])`, rows indexed by `ℓ`.
    pub fn jacobian_blocks(&self, z: &PointN) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        self.check_point(z)?;
        let block = |bar| {
            DMatrix::from_fn(self.n, self.n, |l, k| self.components[l].iter().map(|m| m.derivative(z, k, bar)).sum())
        };
        Ok((block(false), block(true)))
    }

    /// The same blocks by finite differences of [`Self::eval`].
    pub fn jacobian_blocks_fd(&self, z: &PointN, h: f64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        self.check_point(z)?;
        let mut j = DMatrix::zeros(self.n, self.n);
        let mut jb = DMatrix::zeros(self.n, self.n);
        for l in 0..self.n {
            let f = |p: &PointN| self.components[l].iter().map(|m| m.eval(p)).sum::<C64>();
            for k in 0..self.n {
                let (d, db) = wirtinger_n(&f, z, k, h);
                j[(l, k)] = d;
                jb[(l, k)] = db;
            }
        }
        Ok((j, jb))
    }
}

/// `(∂_{z_k} f, ∂_{z̄_k} f)` by 5-point differences along coordinate `k`.
pub(crate) fn wirtinger_n(f: &dyn Fn(&PointN) -> C64, z: &PointN, k: usize, h: f64) -> (C64, C64) {
    let slice = |w: C64| {
        let mut p = z.clone();
        p[k] = w;
        f(&p)
    };
    let fx = diff1(&slice, z[k], C64::new(1.0, 0.0), h);
    let fy = diff1(&slice, z[k], I, h);
    ((fx - I * fy) * 0.5, (fx + I * fy) * 0.5)
}

/// Coefficients `θ = Σ_k P_k dz_k + Q_k dz̄_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialN {
    pub dz: PointN,
    pub dzbar: PointN,
}

/// `P_k = -½[ν z̄_k + μ Σ_ℓ (τ̄_ℓ ∂_kτ_ℓ - τ_ℓ ∂_kτ̄_ℓ)]`,
/// `Q_k = -½[-ν z_k + μ Σ_ℓ (τ̄_ℓ ∂̄_kτ_ℓ - τ_ℓ ∂̄_kτ̄_ℓ)]`.
pub fn potential_n(tau: &EquivariantMapN, nu: f64, mu: f64, z: &PointN) -> Result<PotentialN> {
    let t = tau.eval(z)?;
    let (j, jb) = tau.jacobian_blocks(z)?;
    let n = tau.dim();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    for k in 0..n {
        let (mut sp, mut sq) = (zero(), zero());
        for l in 0..n {
            // ∂_k τ̄ = conj(∂̄_k τ), ∂̄_k τ̄ = conj(∂_k τ)
            sp += t[l].conj() * j[(l, k)] - t[l] * jb[(l, k)].conj();
            sq += t[l].conj() * jb[(l, k)] - t[l] * j[(l, k)].conj();
        }
        p[k] = -0.5 * (z[k].conj() * nu + sp * mu);
        q[k] = -0.5 * (-z[k] * nu + sq * mu);
    }
    Ok(PotentialN { dz: p, dzbar: q })
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> PointN {
    DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
}

/// `max |τ(g·z) - ρ(g)·τ(z)|` over random `(g, z)`.
pub fn equivariance_check_n(tau: &EquivariantMapN, rho: &RhoN, samples: usize, seed: u64) -> Result<CheckReport> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Residuals::new();
    for _ in 0..samples {
        let g = GroupElementN::random(tau.dim(), &mut rng);
        let z = random_point(tau.dim(), &mut rng);
        let lhs = tau.eval(&g.act(&z))?;
        let rhs = rho.apply(&g).act(&tau.eval(&z)?);
        acc.push((lhs - rhs).norm());
    }
    Ok(acc.report("equivariance_n", 1e-10).with_meta("n", tau.dim()))
}

/// The chain-rule relations `J(γz) A = α J(z)` and `J̄(γz) Ā = α J̄(z)`,
/// with Jacobians taken by finite differences.
pub fn chain_rule_residual(tau: &EquivariantMapN, rho: &RhoN, samples: usize, seed: u64) -> Result<CheckReport> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Residuals::new();
    for _ in 0..samples {
        let g = GroupElementN::random(tau.dim(), &mut rng);
        let z = random_point(tau.dim(), &mut rng);
        let alpha = rho.apply(&g).a;
        let (j1, jb1) = tau.jacobian_blocks_fd(&g.act(&z), DEFAULT_FD_STEP)?;
        let (j0, jb0) = tau.jacobian_blocks_fd(&z, DEFAULT_FD_STEP)?;
        acc.push(max_abs(&(&j1 * &g.a - &alpha * &j0)));
        acc.push(max_abs(&(&jb1 * g.a.map(|v| v.conj()) - &alpha * &jb0)));
    }
    Ok(acc.report("chain_rule_n", 1e-7))
}

/// Tensor grid with `per_axis` points on `[-r, r]` in each of the `2n` real
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridN {
    pub n: usize,
    pub radius: f64,
    pub per_axis: usize,
}

impl GridN {
    pub fn new(n: usize, radius: f64, per_axis: usize) -> Result<Self> {
        check_dim(n)?;
        if per_axis < 2 || radius.is_nan() || radius <= 0.0 {
            return Err(MafError::InvalidInput("grid needs at least two points per axis and positive radius".into()));
        }
        Ok(Self { n, radius, per_axis })
    }

    pub fn points(&self) -> Vec<PointN> {
        let axis: Vec<f64> = (0..self.per_axis)
            .map(|i| -self.radius + 2.0 * self.radius * i as f64 / (self.per_axis - 1) as f64)
            .collect();
        let total = self.per_axis.pow(2 * self.n as u32);
        (0..total)
            .map(|mut idx| {
                let mut coords = Vec::with_capacity(2 * self.n);
                for _ in 0..2 * self.n {
                    coords.push(axis[idx % self.per_axis]);
                    idx /= self.per_axis;
                }
                DVector::from_fn(self.n, |k, _| C64::new(coords[2 * k], coords[2 * k + 1]))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
