use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{landau_level, laguerre_table, positive_b};
use crate::calculus::{Grid, QuadGrid, Rect, ScalarField};
use crate::magnetics::{MagneticSystem, PathChoice};
use crate::report::Residuals;
use crate::{cis, herm, CheckReport, GroupElement, MafError, Result, C64};

/// Tail bound `e^{-BR²/8}` required of the quadrature square.
pub const TRUNCATION_TAIL: f64 = 1e-8;

/// Sources whose contribution `|v| e^{-B d²/2}` falls below this fraction of
/// the largest source are skipped.
const PAIR_CUTOFF: f64 = 1e-13;

/// Argument scale of the Laguerre factor, `L_k(scale · B|z-w|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaguerreScale {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl LaguerreScale {
    pub fn factor(self) -> f64 {
        match self {
            LaguerreScale::One => 1.0,
            LaguerreScale::Two => 2.0,
        }
    }
}

impl fmt::Display for LaguerreScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factor())
    }
}

impl FromStr for LaguerreScale {
    type Err = MafError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "1.0" | "one" => Ok(LaguerreScale::One),
            "2" | "2.0" | "two" => Ok(LaguerreScale::Two),
            other => Err(MafError::InvalidInput(format!("laguerre scale must be 1 or 2, got {other:?}"))),
        }
    }
}

/// Landau kernel `(B/π) e^{iB Im(z w̄)} e^{-(B/2)|z-w|²} L_k(scale·B|z-w|²)`.
pub fn landau_kernel(b: f64, k: usize, z: C64, w: C64, scale: LaguerreScale) -> C64 {
    let d2 = (z - w).norm_sqr();
    let l = laguerre_table(k, scale.factor() * b * d2)[k];
    cis(b * herm(z, w).im) * (b / PI * (-0.5 * b * d2).exp() * l)
}

/// `K_k(z, w) = e^{-i(φ(z) - φ(w))} K^B_k(z, w)`.
pub fn kernel(sys: &MagneticSystem, k: usize, z: C64, w: C64, scale: LaguerreScale) -> Result<C64> {
    positive_b(sys.b())?;
    let pz = sys.gauge_phi(z, PathChoice::RealFirst)?;
    let pw = sys.gauge_phi(w, PathChoice::RealFirst)?;
    Ok(cis(pw - pz) * landau_kernel(sys.b(), k, z, w, scale))
}

/// `K_k(·, w)` as a field in the first argument.
fn kernel_field(sys: &MagneticSystem, k: usize, w: C64, scale: LaguerreScale) -> Result<ScalarField> {
    let pw = sys.gauge_phi(w, PathChoice::RealFirst)?;
    let b = sys.b();
    let landau = ScalarField::new(move |z| cis(pw) * landau_kernel(b, k, z, w, scale));
    Ok(sys.gauge_phase_field(-1.0).product(&landau).numeric())
}

/// `max |K(z,w) - conj K(w,z)|` over all pairs of `points`.
pub fn hermiticity_residual(sys: &MagneticSystem, k: usize, points: &[C64], scale: LaguerreScale) -> Result<CheckReport> {
    let mut acc = Residuals::new();
    for &z in points {
        for &w in points {
            acc.push((kernel(sys, k, z, w, scale)? - kernel(sys, k, w, z, scale)?.conj()).norm());
        }
    }
    Ok(acc.report(format!("kernel_hermiticity[k={k}]"), 1e-12))
}

/// Relative residual of `Δ_z K_k(z, w) = λ_k K_k(z, w)` over `grid`.
pub fn kernel_eigen_residual(
    sys: &MagneticSystem,
    k: usize,
    w: C64,
    scale: LaguerreScale,
    grid: &Grid,
) -> Result<CheckReport> {
    let f = kernel_field(sys, k, w, scale)?;
    let lambda = landau_level(sys.b(), k as i64)?;
    let mut acc = Residuals::new();
    let mut top = 0.0f64;
    for z in grid.points() {
        let v = f.try_eval(z)?;
        top = top.max(v.norm());
        acc.push((sys.apply_mixed_laplacian(&f, z)? - v * lambda).norm());
    }
    let mut r = acc.report(format!("kernel_eigen[k={k},scale={scale}]"), 1e-3);
    r.max_residual /= top;
    r.mean_residual /= top;
    Ok(r.with_tol(1e-3).with_meta("laguerre_scale", scale.factor()))
}

/// Outcome of running the `z`-eigen-equation for both Laguerre scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleVerdict {
    pub selected: Option<LaguerreScale>,
    pub residual_one: f64,
    pub residual_two: f64,
    pub report: CheckReport,
}

/// Selects the Laguerre scale whose kernel satisfies the eigen-equation at
/// `k = 1`. The report passes when exactly one scale does.
pub fn adjudicate_laguerre_scale(sys: &MagneticSystem, w: C64, grid: &Grid) -> Result<ScaleVerdict> {
    let one = kernel_eigen_residual(sys, 1, w, LaguerreScale::One, grid)?;
    let two = kernel_eigen_residual(sys, 1, w, LaguerreScale::Two, grid)?;
    let selected = match (one.pass, two.pass) {
        (true, false) => Some(LaguerreScale::One),
        (false, true) => Some(LaguerreScale::Two),
        _ => None,
    };
    let residual = match selected {
        Some(LaguerreScale::One) => one.max_residual,
        Some(LaguerreScale::Two) => two.max_residual,
        None => f64::INFINITY,
    };
    let verdict = match selected {
        Some(s) => format!("L_k({s}·B|z-w|²)"),
        None => "undecided".to_string(),
    };
    let report = CheckReport::scalar("laguerre_scale", residual, 1e-3)
        .with_meta("residual_scale_1", one.max_residual)
        .with_meta("residual_scale_2", two.max_residual)
        .with_meta("verdict", verdict);
    Ok(ScaleVerdict { selected, residual_one: one.max_residual, residual_two: two.max_residual, report })
}

/// Residual of `K(z,w) = e^{i[(φ(gz)-φ(gw)) - (φ(z)-φ(w))]} e^{iB Im⟨z-w, g⁻¹·0⟩} K(gz, gw)`.
pub fn kernel_invariance_residual(
    sys: &MagneticSystem,
    k: usize,
    g: &GroupElement,
    pairs: &[(C64, C64)],
    scale: LaguerreScale,
) -> Result<CheckReport> {
    let phi = |z| sys.gauge_phi(z, PathChoice::RealFirst);
    let origin = g.inverse().act(C64::new(0.0, 0.0));
    let mut acc = Residuals::new();
    for &(z, w) in pairs {
        let (gz, gw) = (g.act(z), g.act(w));
        let gauge = (phi(gz)? - phi(gw)?) - (phi(z)? - phi(w)?);
        let rhs = cis(gauge + sys.b() * herm(z - w, origin).im) * kernel(sys, k, gz, gw, scale)?;
        acc.push((kernel(sys, k, z, w, scale)? - rhs).norm());
    }
    Ok(acc
        .report(format!("kernel_invariance[k={k}]"), 1e-8)
        .with_meta("g", serde_json::to_value(g).unwrap_or_default()))
}

/// `P_k f(z) = ∫ K_k(z,w) f(w) dλ(w)` over `[-R, R]²` with `order`-point
/// panels of width at most `1/2`.
pub fn project(
    sys: &MagneticSystem,
    k: usize,
    f: &ScalarField,
    z: C64,
    radius: f64,
    order: usize,
    scale: LaguerreScale,
) -> Result<C64> {
    let p = Projector::with_resolution(sys, scale, radius, 0.5, order)?;
    let values = p.sample(f)?;
    Ok(p.apply(&values, k, &[z])?[k][0])
}

#[derive(Debug, Clone, Copy)]
struct Node {
    z: C64,
    weight: f64,
    /// `e^{iφ(z)}`
    phase: C64,
}

/// Quadrature discretisation of the projector family `P_0, …, P_k` on a
/// square truncated so that `e^{-BR²/8} < 10⁻⁸`.
#[derive(Debug, Clone)]
pub struct Projector {
    sys: MagneticSystem,
    scale: LaguerreScale,
    radius: f64,
    nodes: Vec<Node>,
}

struct Sources<'a> {
    nodes: &'a [Node],
    /// `w_j v_j e^{iφ(w_j)}`
    coeffs: Vec<(usize, C64)>,
    /// Squared pair cutoff radius per retained source.
    reach2: Vec<f64>,
    cells: HashMap<(i64, i64), (Vec<usize>, f64)>,
    cell: f64,
}

impl Projector {
    /// Smallest half-integer `R` with `e^{-BR²/8} <` [`TRUNCATION_TAIL`].
    pub fn truncation_radius(b: f64) -> f64 {
        let r = (8.0 * (1.0 / TRUNCATION_TAIL).ln() / b).sqrt();
        (2.0 * r).floor() / 2.0 + 0.5
    }

    /// Default resolution: truncation radius, panels of width 1 with 8 nodes.
    pub fn new(sys: &MagneticSystem, scale: LaguerreScale) -> Result<Self> {
        positive_b(sys.b())?;
        Self::with_resolution(sys, scale, Self::truncation_radius(sys.b()), 1.0, 8)
    }

    pub fn with_resolution(
        sys: &MagneticSystem,
        scale: LaguerreScale,
        radius: f64,
        panel: f64,
        order: usize,
    ) -> Result<Self> {
        positive_b(sys.b())?;
        if !(radius > 0.0 && panel > 0.0 && order > 0) {
            return Err(MafError::InvalidInput(format!(
                "projector needs positive radius, panel and order (got {radius}, {panel}, {order})"
            )));
        }
        let grid = QuadGrid::with_panel_width(&Rect::square(radius), panel, order);
        let mut nodes = Vec::with_capacity(grid.len());
        for (&z, &weight) in grid.nodes.iter().zip(&grid.weights) {
            let phi = sys.gauge_phi(z, PathChoice::RealFirst)?;
            nodes.push(Node { z, weight, phase: cis(phi) });
        }
        Ok(Self { sys: sys.clone(), scale, radius, nodes })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `e^{-BR²/8}` for the configured square.
    pub fn tail_bound(&self) -> f64 {
        (-self.sys.b() * self.radius * self.radius / 8.0).exp()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = C64> + '_ {
        self.nodes.iter().map(|n| n.z)
    }

    /// `f` at the quadrature nodes.
    pub fn sample(&self, f: &ScalarField) -> Result<Vec<C64>> {
        self.nodes.iter().map(|n| f.try_eval(n.z)).collect()
    }

    fn sources(&self, values: &[C64]) -> Result<Sources<'_>> {
        if values.len() != self.nodes.len() {
            return Err(MafError::InvalidInput(format!(
                "expected {} node values, got {}",
                self.nodes.len(),
                values.len()
            )));
        }
        let top = values
            .iter()
            .zip(&self.nodes)
            .map(|(v, n)| v.norm() * n.weight)
            .fold(0.0, f64::max);
        let b = self.sys.b();
        let cell = 1.0;
        let mut coeffs = Vec::new();
        let mut reach2 = Vec::new();
        let mut cells: HashMap<(i64, i64), (Vec<usize>, f64)> = HashMap::new();
        for (j, (v, n)) in values.iter().zip(&self.nodes).enumerate() {
            let a = v.norm() * n.weight;
            if !a.is_finite() {
                return Err(MafError::NonFinite { context: "projector source", z: n.z });
            }
            if a <= PAIR_CUTOFF * top || a == 0.0 {
                continue;
            }
            let r2 = 2.0 / b * (a / (PAIR_CUTOFF * top)).ln();
            let slot = coeffs.len();
            coeffs.push((j, v * n.weight * n.phase));
            reach2.push(r2);
            let key = ((n.z.re / cell).floor() as i64, (n.z.im / cell).floor() as i64);
            let e = cells.entry(key).or_insert_with(|| (Vec::new(), 0.0));
            e.0.push(slot);
            e.1 = e.1.max(r2);
        }
        Ok(Sources { nodes: &self.nodes, coeffs, reach2, cells, cell })
    }

    /// `(P_0 g(z), …, P_kmax g(z))` for one target.
    fn apply_one(&self, src: &Sources<'_>, kmax: usize, z: C64, phase_z: C64, out: &mut [C64]) {
        let b = self.sys.b();
        let s = self.scale.factor();
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for ((cx, cy), (slots, r2max)) in &src.cells {
            let x0 = *cx as f64 * src.cell;
            let y0 = *cy as f64 * src.cell;
            let dx = (x0 - z.re).max(z.re - x0 - src.cell).max(0.0);
            let dy = (y0 - z.im).max(z.im - y0 - src.cell).max(0.0);
            if dx * dx + dy * dy > *r2max {
                continue;
            }
            for &slot in slots {
                let (j, c) = src.coeffs[slot];
                let w = src.nodes[j].z;
                let d2 = (z - w).norm_sqr();
                if d2 > src.reach2[slot] {
                    continue;
                }
                let base = cis(b * herm(z, w).im) * c * (-0.5 * b * d2).exp();
                let x = s * b * d2;
                let (mut l_prev, mut l) = (1.0, 1.0 - x);
                out[0] += base;
                if kmax >= 1 {
                    out[1] += base * l;
                }
                for n in 1..kmax {
                    let nf = n as f64;
                    let next = ((2.0 * nf + 1.0 - x) * l - nf * l_prev) / (nf + 1.0);
                    l_prev = l;
                    l = next;
                    out[n + 1] += base * l;
                }
            }
        }
        let pref = phase_z.conj() * (b / PI);
        out.iter_mut().for_each(|o| *o *= pref);
    }

    /// `P_k g` at every node for `k = 0..=kmax`, indexed `[k][node]`.
    pub fn apply_at_nodes(&self, values: &[C64], kmax: usize) -> Result<Vec<Vec<C64>>> {
        let src = self.sources(values)?;
        let mut out = vec![vec![C64::new(0.0, 0.0); self.nodes.len()]; kmax + 1];
        let mut buf = vec![C64::new(0.0, 0.0); kmax + 1];
        for (i, n) in self.nodes.iter().enumerate() {
            self.apply_one(&src, kmax, n.z, n.phase, &mut buf);
            for k in 0..=kmax {
                out[k][i] = buf[k];
            }
        }
        Ok(out)
    }

    /// `P_k g` at arbitrary targets for `k = 0..=kmax`, indexed `[k][target]`.
    pub fn apply(&self, values: &[C64], kmax: usize, targets: &[C64]) -> Result<Vec<Vec<C64>>> {
        let src = self.sources(values)?;
        let mut out = vec![vec![C64::new(0.0, 0.0); targets.len()]; kmax + 1];
        let mut buf = vec![C64::new(0.0, 0.0); kmax + 1];
        for (i, &z) in targets.iter().enumerate() {
            let phase = cis(self.sys.gauge_phi(z, PathChoice::RealFirst)?);
            self.apply_one(&src, kmax, z, phase, &mut buf);
            for k in 0..=kmax {
                out[k][i] = buf[k];
            }
        }
        Ok(out)
    }

    /// Idempotence `P_k P_k f = P_k f` and cross-orthogonality
    /// `P_{k'} P_k f = 0` at `targets`, relative to `sup_nodes |P_k f|`.
    pub fn idempotence(&self, f: &ScalarField, kmax: usize, targets: &[C64]) -> Result<(CheckReport, CheckReport)> {
        let values = self.sample(f)?;
        let first = self.apply_at_nodes(&values, kmax)?;
        let mut idem = Residuals::new();
        let mut cross = Residuals::new();
        let mut sups = Vec::new();
        let direct = self.apply(&values, kmax, targets)?;
        for (k, pk) in first.iter().enumerate() {
            let sup = pk.iter().map(|v| v.norm()).fold(0.0, f64::max);
            sups.push(sup);
            if sup == 0.0 {
                return Err(MafError::Precondition(format!("P_{k} f vanishes on the quadrature nodes")));
            }
            let second = self.apply(pk, kmax, targets)?;
            for (kp, row) in second.iter().enumerate() {
                for (t, v) in row.iter().enumerate() {
                    if kp == k {
                        idem.push((v - direct[k][t]).norm() / sup);
                    } else {
                        cross.push(v.norm() / sup);
                    }
                }
            }
        }
        let meta = |r: CheckReport| {
            r.with_meta("kmax", kmax)
                .with_meta("radius", self.radius)
                .with_meta("tail_bound", self.tail_bound())
                .with_meta("nodes", self.nodes.len())
                .with_meta("laguerre_scale", self.scale.factor())
                .with_meta("sup_norms", sups.clone())
        };
        Ok((meta(idem.report("projector_idempotence", 1e-3)), meta(cross.report("projector_orthogonality", 1e-3))))
    }

    /// `|P_k u - [k = level] u|` relative to `sup |u|` at `targets`, for a
    /// level-`level` eigenfunction `u`.
    pub fn reproducing(&self, u: &ScalarField, level: usize, kmax: usize, targets: &[C64]) -> Result<CheckReport> {
        let values = self.sample(u)?;
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let out = self.apply(&values, kmax, targets)?;
        let mut acc = Residuals::new();
        for (k, row) in out.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                let expect = if k == level { u.try_eval(targets[t])? } else { C64::new(0.0, 0.0) };
                acc.push((v - expect).norm() / sup);
            }
        }
        Ok(acc.report(format!("projector_reproducing[level={level}]"), 1e-3))
    }
}
