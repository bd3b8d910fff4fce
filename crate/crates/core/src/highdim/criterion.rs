use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{max_abs, potential_n, wirtinger_n, EquivariantMapN, GridN, PointN};
use crate::calculus::DEFAULT_FD_STEP;
use crate::{CheckReport, MafError, Result, C64};

/// The determinants attached to `τ_ℓ`:
/// `A = ∂_iτ̄ ∂_jτ - ∂_jτ̄ ∂_iτ`, `B = ∂_iτ̄ ∂̄_jτ - ∂̄_jτ̄ ∂_iτ`,
/// `C = ∂̄_iτ̄ ∂_jτ - ∂_jτ̄ ∂̄_iτ`, `D = ∂̄_iτ̄ ∂̄_jτ - ∂̄_jτ̄ ∂̄_iτ`
/// and `F = |∂̄_kτ|² - |∂_kτ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantCoeffs {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub f: f64,
}

fn coeffs_from_blocks(j: &DMatrix<C64>, jb: &DMatrix<C64>, l: usize, i: usize, jj: usize, k: usize) -> DeterminantCoeffs {
    // ∂_i τ̄ = conj(∂̄_i τ), ∂̄_i τ̄ = conj(∂_i τ)
    let (d_i, db_i, d_j, db_j) = (j[(l, i)], jb[(l, i)], j[(l, jj)], jb[(l, jj)]);
    DeterminantCoeffs {
        a: db_i.conj() * d_j - db_j.conj() * d_i,
        b: db_i.conj() * db_j - d_j.conj() * d_i,
        c: d_i.conj() * d_j - db_j.conj() * db_i,
        d: d_i.conj() * db_j - d_j.conj() * db_i,
        f: jb[(l, k)].norm_sqr() - j[(l, k)].norm_sqr(),
    }
}

/// `A, B, C, D` for the pair `i < j` and `F` for index `k`, all for component `ℓ`.
pub fn determinant_coeffs(
    tau: &EquivariantMapN,
    z: &PointN,
    l: usize,
    i: usize,
    j: usize,
    k: usize,
) -> Result<DeterminantCoeffs> {
    let n = tau.dim();
    if l >= n || j >= n || k >= n {
        return Err(MafError::InvalidInput(format!("indices (ℓ={l}, i={i}, j={j}, k={k}) out of range for n={n}")));
    }
    if i >= j {
        return Err(MafError::Precondition(format!("need i < j, got i={i}, j={j}")));
    }
    let (jm, jbm) = tau.jacobian_blocks(z)?;
    Ok(coeffs_from_blocks(&jm, &jbm, l, i, j, k))
}

/// Coefficients of `dθ` at a point: `dz_i∧dz_j` and `dz̄_i∧dz̄_j` for `i < j`
/// (upper triangles, diagonal unused) and `dz_i∧dz̄_j` for all `i, j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormCoeffs {
    pub dz_dz: DMatrix<C64>,
    pub dz_dzbar: DMatrix<C64>,
    pub dzbar_dzbar: DMatrix<C64>,
}

impl TwoFormCoeffs {
    fn max_gap(&self, other: &Self) -> f64 {
        max_abs(&(&self.dz_dz - &other.dz_dz))
            .max(max_abs(&(&self.dz_dzbar - &other.dz_dzbar)))
            .max(max_abs(&(&self.dzbar_dzbar - &other.dzbar_dzbar)))
    }
}

/// `dθ` by finite differences of the potential coefficients `P_k, Q_k`:
/// `[dz_i∧dz_j] = ∂_iP_j - ∂_jP_i`, `[dz_i∧dz̄_j] = ∂_iQ_j - ∂̄_jP_i`,
/// `[dz̄_i∧dz̄_j] = ∂̄_iQ_j - ∂̄_jQ_i`.
pub fn two_form_coeffs(tau: &EquivariantMapN, nu: f64, mu: f64, z: &PointN) -> Result<TwoFormCoeffs> {
    let n = tau.dim();
    // dp[(k, i)] = ∂_i P_k etc.
    let mut dp = DMatrix::zeros(n, n);
    let mut dbp = DMatrix::zeros(n, n);
    let mut dq = DMatrix::zeros(n, n);
    let mut dbq = DMatrix::zeros(n, n);
    let nan = C64::new(f64::NAN, f64::NAN);
    for k in 0..n {
        let p = |w: &PointN| potential_n(tau, nu, mu, w).map(|t| t.dz[k]).unwrap_or(nan);
        let q = |w: &PointN| potential_n(tau, nu, mu, w).map(|t| t.dzbar[k]).unwrap_or(nan);
        for i in 0..n {
            let (a, b) = wirtinger_n(&p, z, i, DEFAULT_FD_STEP);
            dp[(k, i)] = a;
            dbp[(k, i)] = b;
            let (a, b) = wirtinger_n(&q, z, i, DEFAULT_FD_STEP);
            dq[(k, i)] = a;
            dbq[(k, i)] = b;
        }
    }
    let mut out = TwoFormCoeffs {
        dz_dz: DMatrix::zeros(n, n),
        dz_dzbar: DMatrix::zeros(n, n),
        dzbar_dzbar: DMatrix::zeros(n, n),
    };
    for i in 0..n {
        for j in 0..n {
            out.dz_dzbar[(i, j)] = dq[(j, i)] - dbp[(i, j)];
            if i < j {
                out.dz_dz[(i, j)] = dp[(j, i)] - dp[(i, j)];
                out.dzbar_dzbar[(i, j)] = dbq[(j, i)] - dbq[(i, j)];
            }
        }
    }
    let finite = out.dz_dz.iter().chain(out.dz_dzbar.iter()).chain(out.dzbar_dzbar.iter()).all(|v| v.is_finite());
    if !finite {
        return Err(MafError::NonFinite { context: "two-form coefficients", z: z[0] });
    }
    Ok(out)
}

/// Outcome of [`constant_field_test`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantFieldVerdict {
    /// `max |A|`, `max |B|` and the spread of every `F_{ℓ,k}` must be ≤ tol.
    pub per_component: CheckReport,
    /// Spread of every coefficient of `dθ` over the grid must be ≤ tol.
    pub direct: CheckReport,
    pub agreement: bool,
    /// `F_{ℓ,k}` at the first grid point, indexed `[ℓ][k]`.
    pub f_values: Vec<Vec<f64>>,
    /// `dz_k∧dz̄_k` coefficients of `dθ` at the first grid point.
    pub field_diagonal: Vec<C64>,
}

impl ConstantFieldVerdict {
    /// The three reports, with the agreement flag as a scalar check.
    pub fn reports(&self) -> Vec<CheckReport> {
        let flag = CheckReport::scalar("highdim_agreement", if self.agreement { 0.0 } else { 1.0 }, 0.0)
            .with_meta("per_component_pass", self.per_component.pass)
            .with_meta("direct_pass", self.direct.pass);
        vec![self.per_component.clone(), self.direct.clone(), flag]
    }
}

/// Per-component determinant criterion and direct 2-form oracle on `grid`.
pub fn constant_field_test(
    tau: &EquivariantMapN,
    nu: f64,
    mu: f64,
    grid: &GridN,
    tol: f64,
) -> Result<ConstantFieldVerdict> {
    let n = tau.dim();
    if grid.n != n {
        return Err(MafError::InvalidInput(format!("grid dimension {} does not match τ dimension {n}", grid.n)));
    }
    let points = grid.points();
    let (mut max_a, mut max_b, mut identity_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut f_lo = vec![vec![f64::INFINITY; n]; n];
    let mut f_hi = vec![vec![f64::NEG_INFINITY; n]; n];
    let mut first: Option<TwoFormCoeffs> = None;
    let (mut direct_gap, mut two_zero) = (0.0f64, 0.0f64);
    for z in &points {
        let (j, jb) = tau.jacobian_blocks(z)?;
        for l in 0..n {
            for k in 0..n {
                let f = jb[(l, k)].norm_sqr() - j[(l, k)].norm_sqr();
                f_lo[l][k] = f_lo[l][k].min(f);
                f_hi[l][k] = f_hi[l][k].max(f);
            }
            for i in 0..n {
                for jj in i + 1..n {
                    let c = coeffs_from_blocks(&j, &jb, l, i, jj, i);
                    max_a = max_a.max(c.a.norm());
                    max_b = max_b.max(c.b.norm());
                    identity_gap = identity_gap.max((c.d + c.a.conj()).norm()).max((c.c + c.b.conj()).norm());
                }
            }
        }
        let coeffs = two_form_coeffs(tau, nu, mu, z)?;
        two_zero = two_zero.max(max_abs(&coeffs.dz_dz)).max(max_abs(&coeffs.dzbar_dzbar));
        match &first {
            None => first = Some(coeffs),
            Some(f0) => direct_gap = direct_gap.max(coeffs.max_gap(f0)),
        }
    }
    let f_spread = (0..n)
        .flat_map(|l| (0..n).map(move |k| (l, k)))
        .map(|(l, k)| f_hi[l][k] - f_lo[l][k])
        .fold(0.0, f64::max);
    let first = first.ok_or_else(|| MafError::InvalidInput("empty grid".into()))?;
    let z0 = &points[0];
    let (j0, jb0) = tau.jacobian_blocks(z0)?;
    let f_values: Vec<Vec<f64>> = (0..n)
        .map(|l| (0..n).map(|k| jb0[(l, k)].norm_sqr() - j0[(l, k)].norm_sqr()).collect())
        .collect();
    let field_diagonal: Vec<C64> = (0..n).map(|k| first.dz_dzbar[(k, k)]).collect();

    let worst = max_a.max(max_b).max(f_spread);
    let per_component = CheckReport::scalar("highdim_per_component", worst, tol)
        .with_meta("max_abs_A", max_a)
        .with_meta("max_abs_B", max_b)
        .with_meta("F_spread", f_spread)
        .with_meta("conjugation_identity_gap", identity_gap)
        .with_meta("F", serde_json::to_value(&f_values).unwrap_or_default());
    let direct = CheckReport::scalar("highdim_direct", direct_gap, tol)
        .with_meta("max_abs_20_02_part", two_zero)
        .with_meta("field_diagonal", serde_json::to_value(&field_diagonal).unwrap_or_default())
        .with_meta("points", points.len());
    let agreement = per_component.pass == direct.pass;
    Ok(ConstantFieldVerdict { per_component, direct, agreement, f_values, field_diagonal })
}
