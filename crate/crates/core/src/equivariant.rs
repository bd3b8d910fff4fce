//! Equivariant pairs `(ρ, τ)` with `τ(g·z) = ρ(g)·τ(z)`.
//!
//! Built-in endomorphism families:
//!
//! * identity;
//! * conjugation by `h = [α_h, β_h]`, `ρ_h(g) = h g h⁻¹ = [a, (1 − a)β_h + α_h b]`;
//! * complex conjugation `[a, b] ↦ [ā, b̄]`;
//! * separated maps `[a, b] ↦ [ρ̃(a), τ̃(b)]`;
//! * custom closures, admitted only after a homomorphism check.
//!
//! For a built-in `ρ`, the map `z ↦ ρ([1, z])·β` is real-affine, so every
//! `τ_β` built here carries exact derivatives.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::error::{MafError, Result};
use crate::group::GroupElement;
use crate::report::{CheckReport, Residuals};
use crate::{cis, C64};

/// Pairs sampled when vetting a custom endomorphism.
pub const HOMOMORPHISM_SAMPLES: usize = 128;
const HOMOMORPHISM_TOL: f64 = 1e-9;
const FIXED_POINT_TOL: f64 = 1e-9;
const EQUISPACED_ANGLES: usize = 64;
const RANDOM_ANGLES: usize = 32;

/// Rotation part `ρ̃ : U(1) → U(1)` of a separated endomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoTilde {
    /// `a ↦ aⁿ`.
    Power { n: i32 },
    /// `a ↦ ā`.
    Conjugate,
}

impl RhoTilde {
    pub fn apply(&self, a: C64) -> C64 {
        match *self {
            RhoTilde::Power { n } => a.powi(n),
            RhoTilde::Conjugate => a.conj(),
        }
    }
}

/// Translation part `τ̃ : ℂ → ℂ` of a separated endomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauTilde {
    /// `b ↦ c·b`.
    Linear { c: C64 },
    /// `b ↦ b̄`.
    Conjugate,
}

impl TauTilde {
    pub fn apply(&self, b: C64) -> C64 {
        match *self {
            TauTilde::Linear { c } => c * b,
            TauTilde::Conjugate => b.conj(),
        }
    }
}

pub type EndoFn = Arc<dyn Fn(&GroupElement) -> GroupElement + Send + Sync>;

#[derive(Clone)]
pub struct CustomEndo {
    name: String,
    map: EndoFn,
}

impl CustomEndo {
    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Clone)]
pub enum Endomorphism {
    Identity,
    Conjugation(GroupElement),
    ComplexConjugate,
    Separated { rho_tilde: RhoTilde, tau_tilde: TauTilde },
    Custom(CustomEndo),
}

impl fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endomorphism::Identity => write!(f, "Identity"),
            Endomorphism::Conjugation(h) => write!(f, "Conjugation({h})"),
            Endomorphism::ComplexConjugate => write!(f, "ComplexConjugate"),
            Endomorphism::Separated { rho_tilde, tau_tilde } => {
                write!(f, "Separated({rho_tilde:?}, {tau_tilde:?})")
            }
            Endomorphism::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

/// JSON form of the serialisable families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EndomorphismSpec {
    Identity,
    Conjugation { h: GroupElement },
    ComplexConjugate,
    Separated { rho_tilde: RhoTilde, tau_tilde: TauTilde },
}

impl From<EndomorphismSpec> for Endomorphism {
    fn from(s: EndomorphismSpec) -> Self {
        match s {
            EndomorphismSpec::Identity => Endomorphism::Identity,
            EndomorphismSpec::Conjugation { h } => Endomorphism::Conjugation(h),
            EndomorphismSpec::ComplexConjugate => Endomorphism::ComplexConjugate,
            EndomorphismSpec::Separated { rho_tilde, tau_tilde } => {
                Endomorphism::Separated { rho_tilde, tau_tilde }
            }
        }
    }
}

fn random_element(rng: &mut ChaCha8Rng) -> GroupElement {
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    let b = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    GroupElement::from_angle(t, b)
}

fn random_point(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

/// The U(1) sample used for fixed-point detection: equispaced angles then
/// seeded random ones.
pub fn rotation_samples(seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<C64> = (0..EQUISPACED_ANGLES)
        .map(|k| cis(std::f64::consts::TAU * k as f64 / EQUISPACED_ANGLES as f64))
        .collect();
    out.extend((0..RANDOM_ANGLES).map(|_| cis(rng.gen_range(0.0..std::f64::consts::TAU))));
    out
}

impl Endomorphism {
    /// Wrap a closure after checking it is a homomorphism on sampled pairs.
    pub fn custom(
        name: impl Into<String>,
        map: impl Fn(&GroupElement) -> GroupElement + Send + Sync + 'static,
    ) -> Result<Self> {
        let endo = Endomorphism::Custom(CustomEndo {
            name: name.into(),
            map: Arc::new(map),
        });
        endo.validate()?;
        Ok(endo)
    }

    pub fn spec(&self) -> Option<EndomorphismSpec> {
        Some(match self {
            Endomorphism::Identity => EndomorphismSpec::Identity,
            Endomorphism::Conjugation(h) => EndomorphismSpec::Conjugation { h: *h },
            Endomorphism::ComplexConjugate => EndomorphismSpec::ComplexConjugate,
            Endomorphism::Separated { rho_tilde, tau_tilde } => EndomorphismSpec::Separated {
                rho_tilde: *rho_tilde,
                tau_tilde: *tau_tilde,
            },
            Endomorphism::Custom(_) => return None,
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Endomorphism::Identity => "identity",
            Endomorphism::Conjugation(_) => "conjugation",
            Endomorphism::ComplexConjugate => "complex_conjugate",
            Endomorphism::Separated { .. } => "separated",
            Endomorphism::Custom(_) => "custom",
        }
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        let (a, b) = (g.a(), g.b());
        match self {
            Endomorphism::Identity => *g,
            Endomorphism::Conjugation(h) => {
                GroupElement::renormalized(a, (C64::new(1.0, 0.0) - a) * h.b() + h.a() * b)
            }
            Endomorphism::ComplexConjugate => GroupElement::renormalized(a.conj(), b.conj()),
            Endomorphism::Separated { rho_tilde, tau_tilde } => {
                GroupElement::renormalized(rho_tilde.apply(a), tau_tilde.apply(b))
            }
            Endomorphism::Custom(c) => (c.map)(g),
        }
    }

    /// `max |ρ(gh) − ρ(g)ρ(h)|` over seeded random pairs, plus a check that
    /// every image is a valid element.
    pub fn homomorphism_residual(&self, n_samples: usize, seed: u64) -> CheckReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = Residuals::new();
        for _ in 0..n_samples {
            let (g, h) = (random_element(&mut rng), random_element(&mut rng));
            let (rg, rh, rgh) = (self.apply(&g), self.apply(&h), self.apply(&g.compose(&h)));
            let unit = [rg, rh, rgh]
                .iter()
                .map(|x| (x.a().norm() - 1.0).abs())
                .fold(0.0, f64::max);
            acc.push(rgh.distance(&rg.compose(&rh)).max(unit));
        }
        acc.report("homomorphism", HOMOMORPHISM_TOL)
            .with_meta("family", self.family())
            .with_meta("seed", seed)
    }

    pub fn validate(&self) -> Result<()> {
        let rep = self.homomorphism_residual(HOMOMORPHISM_SAMPLES, 0);
        if rep.pass {
            Ok(())
        } else {
            Err(MafError::InvalidEndomorphism(format!(
                "{} fails ρ(gh) = ρ(g)ρ(h): residual {:e}",
                self.family(),
                rep.max_residual
            )))
        }
    }
}

/// Free-function form of [`Endomorphism::apply`].
pub fn apply_endo(rho: &Endomorphism, g: &GroupElement) -> GroupElement {
    rho.apply(g)
}

/// `Ξ_ρ`, the points fixed by every `ρ([a, 0])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedPointSet {
    AllOfPlane,
    SinglePoint { beta: C64 },
    Empty,
}

impl FixedPointSet {
    pub fn contains(&self, beta: C64, tol: f64) -> bool {
        match *self {
            FixedPointSet::AllOfPlane => true,
            FixedPointSet::SinglePoint { beta: p } => (p - beta).norm() <= tol,
            FixedPointSet::Empty => false,
        }
    }
}

/// Classifies `Ξ_ρ` from the images `ρ([a, 0]) = [φ_a, ψ_a]` of sampled rotations.
pub fn xi_rho(rho: &Endomorphism) -> Result<FixedPointSet> {
    const ONE_TOL: f64 = 1e-12;
    let samples = rotation_samples(0);
    let images: Vec<GroupElement> = samples
        .iter()
        .map(|&a| rho.apply(&GroupElement::renormalized(a, C64::new(0.0, 0.0))))
        .collect();
    let mut all_trivial_rotation = true;
    let mut pure_translation = false;
    let mut beta: Option<C64> = None;
    let mut best_gap = 0.0;
    for r in &images {
        let gap = (C64::new(1.0, 0.0) - r.a()).norm();
        if gap < ONE_TOL {
            pure_translation |= r.b().norm() > ONE_TOL;
            continue;
        }
        all_trivial_rotation = false;
        // the best-conditioned sample gives the candidate
        if gap > best_gap {
            best_gap = gap;
            beta = Some(r.b() / (C64::new(1.0, 0.0) - r.a()));
        }
    }
    if pure_translation {
        return Ok(FixedPointSet::Empty);
    }
    if all_trivial_rotation {
        return Ok(FixedPointSet::AllOfPlane);
    }
    let beta = beta.expect("some rotation is nontrivial");
    let worst = images
        .iter()
        .map(|r| r.stabilizer_residual(beta))
        .fold(0.0, f64::max);
    if worst > FIXED_POINT_TOL {
        return Err(MafError::InvalidEndomorphism(format!(
            "{}: rotations have no common fixed point (residual {worst:e})",
            rho.family()
        )));
    }
    Ok(FixedPointSet::SinglePoint { beta })
}

/// `τ(z) = c·z + d·z̄ + β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineTau {
    pub c: C64,
    pub d: C64,
    pub beta: C64,
}

impl AffineTau {
    pub fn eval(&self, z: C64) -> C64 {
        self.c * z + self.d * z.conj() + self.beta
    }
}

/// How a compatible map was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    FromBeta { beta: C64 },
    Affine { alpha: C64, beta: C64 },
    Conjugate,
    Identity,
    Custom { name: String },
}

#[derive(Debug, Clone)]
pub struct EquivariantMap {
    field: ScalarField,
    provenance: Provenance,
    affine: Option<AffineTau>,
}

impl EquivariantMap {
    pub fn from_affine(t: AffineTau, provenance: Provenance) -> Self {
        Self {
            field: ScalarField::affine(t.c, t.d, t.beta),
            provenance,
            affine: Some(t),
        }
    }

    /// `z ↦ αz + β`.
    pub fn affine_map(alpha: C64, beta: C64) -> Self {
        Self::from_affine(
            AffineTau { c: alpha, d: C64::new(0.0, 0.0), beta },
            Provenance::Affine { alpha, beta },
        )
    }

    /// `z ↦ z̄`.
    pub fn conjugate() -> Self {
        Self::from_affine(
            AffineTau {
                c: C64::new(0.0, 0.0),
                d: C64::new(1.0, 0.0),
                beta: C64::new(0.0, 0.0),
            },
            Provenance::Conjugate,
        )
    }

    pub fn identity() -> Self {
        Self::from_affine(
            AffineTau {
                c: C64::new(1.0, 0.0),
                d: C64::new(0.0, 0.0),
                beta: C64::new(0.0, 0.0),
            },
            Provenance::Identity,
        )
    }

    pub fn custom(name: impl Into<String>, field: ScalarField) -> Self {
        Self {
            field,
            provenance: Provenance::Custom { name: name.into() },
            affine: None,
        }
    }

    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        self.field.eval(z)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn affine(&self) -> Option<AffineTau> {
        self.affine
    }
}

/// `τ_β(z) = ρ([1, z])·β`, defined when `β ∈ Ξ_ρ`.
pub fn tau_from_beta(rho: &Endomorphism, beta: C64) -> Result<EquivariantMap> {
    let xi = xi_rho(rho)?;
    if !xi.contains(beta, FIXED_POINT_TOL) {
        return Err(MafError::Precondition(format!(
            "β = {beta} is not in Ξ_ρ = {xi:?}; τ_β is only equivariant for β ∈ Ξ_ρ"
        )));
    }
    let prov = Provenance::FromBeta { beta };
    let translate = |z: C64| rho.apply(&GroupElement::translation(z));
    if matches!(rho, Endomorphism::Custom(_)) {
        let rho = rho.clone();
        let field = ScalarField::new(move |z| rho.apply(&GroupElement::translation(z)).act(beta));
        return Ok(EquivariantMap {
            field,
            provenance: prov,
            affine: None,
        });
    }
    // built-in families send translations to translations, real-linearly in z
    let (u, v) = (translate(C64::new(1.0, 0.0)).b(), translate(C64::new(0.0, 1.0)).b());
    let t = AffineTau {
        c: (u - crate::I * v) * 0.5,
        d: (u + crate::I * v) * 0.5,
        beta,
    };
    Ok(EquivariantMap::from_affine(t, prov))
}

/// `max |τ(g·z) − ρ(g)·τ(z)|` over seeded samples. The first sample is the
/// probe `g = [i, 0]`, `z = 0`.
pub fn check_equivariance(rho: &Endomorphism, tau: &EquivariantMap, n_samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Residuals::new();
    let mut worst = (GroupElement::IDENTITY, C64::new(0.0, 0.0));
    let probe = (GroupElement::from_angle(std::f64::consts::FRAC_PI_2, C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
    for k in 0..n_samples.max(1) {
        let (g, z) = if k == 0 {
            probe
        } else {
            (random_element(&mut rng), random_point(&mut rng))
        };
        let r = (tau.eval(g.act(z)) - rho.apply(&g).act(tau.eval(z))).norm();
        if r > acc.max() || acc.count() == 0 {
            worst = (g, z);
        }
        acc.push(r);
    }
    acc.report("equivariance", 1e-9)
        .with_meta("family", rho.family())
        .with_meta("seed", seed)
        .with_meta("worst_g", serde_json::to_value(worst.0).unwrap_or_default())
        .with_meta("worst_z", serde_json::json!([worst.1.re, worst.1.im]))
}

/// The two cases for separated endomorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatedCase {
    /// `ρ̃` nontrivial and `τ̃(ab + c) = ρ̃(a)τ̃(b) + τ̃(c)`; compatible `τ = τ̃`.
    NontrivialRotation,
    /// `ρ̃ ≡ 1` and `τ̃` additive; compatible `τ = τ̃ + β` for every `β`.
    TrivialRotation,
    Neither,
}

#[derive(Debug, Clone)]
pub struct SeparatedClassification {
    pub case: SeparatedCase,
    /// `Ξ_ρ` for the two admissible cases.
    pub fixed_points: Option<FixedPointSet>,
    /// Compatible map with `β = 0`.
    pub tau: Option<EquivariantMap>,
    /// First violating `(a, b, c)` in sampling order.
    pub violation: Option<(C64, C64, C64)>,
    pub report: CheckReport,
}

/// Decides which case of the separated-endomorphism dichotomy applies.
pub fn classify_separated(rho_tilde: RhoTilde, tau_tilde: TauTilde, n_samples: usize, seed: u64) -> SeparatedClassification {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![(crate::I, C64::new(1.0, 0.0), C64::new(0.0, 0.0))];
    for _ in 0..n_samples {
        let a = cis(rng.gen_range(0.0..std::f64::consts::TAU));
        samples.push((a, random_point(&mut rng), random_point(&mut rng)));
    }
    let trivial = samples.iter().all(|(a, _, _)| (rho_tilde.apply(*a) - 1.0).norm() <= 1e-12);
    let mut acc = Residuals::new();
    let mut violation = None;
    for &(a, b, c) in &samples {
        let lhs = tau_tilde.apply(a * b + c);
        let rhs = if trivial {
            tau_tilde.apply(b) + tau_tilde.apply(c)
        } else {
            rho_tilde.apply(a) * tau_tilde.apply(b) + tau_tilde.apply(c)
        };
        let r = (lhs - rhs).norm();
        if r > TOL && violation.is_none() {
            violation = Some((a, b, c));
        }
        acc.push(r);
    }
    let report = acc.report("separated_classification", TOL);
    let ok = report.pass;
    let case = match (ok, trivial) {
        (false, _) => SeparatedCase::Neither,
        (true, true) => SeparatedCase::TrivialRotation,
        (true, false) => SeparatedCase::NontrivialRotation,
    };
    let (fixed_points, tau) = if ok {
        let rho = Endomorphism::Separated { rho_tilde, tau_tilde };
        let xi = if trivial {
            FixedPointSet::AllOfPlane
        } else {
            FixedPointSet::SinglePoint { beta: C64::new(0.0, 0.0) }
        };
        (Some(xi), tau_from_beta(&rho, C64::new(0.0, 0.0)).ok())
    } else {
        (None, None)
    };
    let mut report = report.with_meta("case", format!("{case:?}"));
    if let Some((a, b, c)) = violation {
        report = report.with_meta(
            "violation",
            serde_json::json!({"a": [a.re, a.im], "b": [b.re, b.im], "c": [c.re, c.im]}),
        );
    }
    SeparatedClassification {
        case,
        fixed_points,
        tau,
        violation,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn el(a: C64, b: C64) -> GroupElement {
        GroupElement::new(a, b).unwrap()
    }

    fn alteration_h() -> GroupElement {
        GroupElement::from_angle(std::f64::consts::FRAC_PI_3, c(1.0, 0.0))
    }

    fn builtins() -> Vec<Endomorphism> {
        vec![
            Endomorphism::Identity,
            Endomorphism::Conjugation(alteration_h()),
            Endomorphism::ComplexConjugate,
            Endomorphism::Separated {
                rho_tilde: RhoTilde::Conjugate,
                tau_tilde: TauTilde::Conjugate,
            },
            Endomorphism::Separated {
                rho_tilde: RhoTilde::Power { n: 0 },
                tau_tilde: TauTilde::Linear { c: c(0.0, 0.0) },
            },
        ]
    }

    #[test]
    fn apply_endo_examples() {
        let g = el(c(0.3, 0.4) / 0.5, c(1.0, 2.0));
        assert_eq!(apply_endo(&Endomorphism::Identity, &g), g);
        let h = GroupElement::translation(c(1.0, 0.0));
        let r = apply_endo(&Endomorphism::Conjugation(h), &el(crate::I, c(0.0, 0.0)));
        assert!(r.approx_eq(&el(crate::I, c(1.0, -1.0)), 1e-15));
        // matrix oracle h g h⁻¹
        let g = el(crate::I, c(0.0, 0.0));
        assert!(r.approx_eq(&h.compose(&g).compose(&h.inverse()), 1e-15));
        let r = apply_endo(&Endomorphism::ComplexConjugate, &el(crate::I, c(1.0, 2.0)));
        assert!(r.approx_eq(&el(-crate::I, c(1.0, -2.0)), 1e-15));
    }

    #[test]
    fn xi_rho_examples() {
        assert_eq!(
            xi_rho(&Endomorphism::ComplexConjugate).unwrap(),
            FixedPointSet::SinglePoint { beta: c(0.0, 0.0) }
        );
        match xi_rho(&Endomorphism::Conjugation(alteration_h())).unwrap() {
            FixedPointSet::SinglePoint { beta } => assert!((beta - 1.0).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            xi_rho(&Endomorphism::Identity).unwrap(),
            FixedPointSet::SinglePoint { beta: c(0.0, 0.0) }
        );
        let trivial_rot = Endomorphism::Separated {
            rho_tilde: RhoTilde::Power { n: 0 },
            tau_tilde: TauTilde::Linear { c: c(2.0, 1.0) },
        };
        assert_eq!(xi_rho(&trivial_rot).unwrap(), FixedPointSet::AllOfPlane);
    }

    #[test]
    fn xi_rho_empty_for_translating_rotations() {
        // ρ([a, b]) = [1, arg-dependent shift] is not a homomorphism, but it
        // exercises the empty branch of the trichotomy
        let rho = Endomorphism::Custom(CustomEndo {
            name: "shift".into(),
            map: Arc::new(|g: &GroupElement| GroupElement::translation(g.a() - 1.0)),
        });
        assert_eq!(xi_rho(&rho).unwrap(), FixedPointSet::Empty);
    }

    #[test]
    fn tau_from_beta_examples() {
        let t = tau_from_beta(&Endomorphism::ComplexConjugate, c(0.0, 0.0)).unwrap();
        let z = c(0.7, -1.3);
        assert!((t.eval(z) - z.conj()).norm() < 1e-15);
        let h = alteration_h();
        let t = tau_from_beta(&Endomorphism::Conjugation(h), h.b()).unwrap();
        assert!((t.eval(z) - h.act(z)).norm() < 1e-14);
        let t = tau_from_beta(&Endomorphism::Identity, c(0.0, 0.0)).unwrap();
        assert!((t.eval(z) - z).norm() < 1e-15);
        assert!(matches!(
            tau_from_beta(&Endomorphism::Identity, c(1.0, 0.0)),
            Err(MafError::Precondition(_))
        ));
    }

    #[test]
    fn all_of_plane_family_gives_translations() {
        let rho = Endomorphism::Separated {
            rho_tilde: RhoTilde::Power { n: 0 },
            tau_tilde: TauTilde::Linear { c: c(0.0, 0.0) },
        };
        for beta in [c(1.0, 0.0), c(-2.0, 0.5)] {
            let t = tau_from_beta(&rho, beta).unwrap();
            assert!(check_equivariance(&rho, &t, 50, 3).max_residual <= 1e-10);
        }
    }

    #[test]
    fn check_equivariance_examples() {
        let h = alteration_h();
        let rho = Endomorphism::Conjugation(h);
        let t = tau_from_beta(&rho, h.b()).unwrap();
        assert!(check_equivariance(&rho, &t, 200, 1).max_residual <= 1e-12);
        let rep = check_equivariance(&Endomorphism::ComplexConjugate, &EquivariantMap::conjugate(), 200, 1);
        assert!(rep.max_residual <= 1e-12);
        let shifted = EquivariantMap::affine_map(c(1.0, 0.0), c(1.0, 0.0));
        let rep = check_equivariance(&Endomorphism::Identity, &shifted, 10, 1);
        assert!(rep.max_residual >= c(1.0, -1.0).norm() - 1e-12);
        assert!(!rep.pass);
    }

    #[test]
    fn custom_endomorphism_must_be_homomorphism() {
        let ok = Endomorphism::custom("id", |g: &GroupElement| *g);
        assert!(ok.is_ok());
        let bad = Endomorphism::custom("square-rotation", |g: &GroupElement| {
            GroupElement::renormalized(g.a() * g.a(), g.b())
        });
        assert!(matches!(bad, Err(MafError::InvalidEndomorphism(_))));
    }

    #[test]
    fn classify_separated_examples() {
        let r = classify_separated(RhoTilde::Conjugate, TauTilde::Conjugate, 100, 0);
        assert_eq!(r.case, SeparatedCase::NontrivialRotation);
        let tau = r.tau.unwrap();
        let z = c(0.2, 0.9);
        assert!((tau.eval(z) - z.conj()).norm() < 1e-15);

        let r = classify_separated(RhoTilde::Power { n: 0 }, TauTilde::Linear { c: c(0.0, 0.0) }, 100, 0);
        assert_eq!(r.case, SeparatedCase::TrivialRotation);
        assert_eq!(r.fixed_points, Some(FixedPointSet::AllOfPlane));

        let r = classify_separated(RhoTilde::Power { n: 2 }, TauTilde::Linear { c: c(1.0, 0.0) }, 100, 0);
        assert_eq!(r.case, SeparatedCase::Neither);
        let (a, b, cc) = r.violation.unwrap();
        assert_eq!((a, b, cc), (crate::I, c(1.0, 0.0), c(0.0, 0.0)));
        assert!(r.report.max_residual >= 2f64.sqrt() - 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = r#"{"family":"separated","rho_tilde":{"kind":"power","n":1},"tau_tilde":{"kind":"linear","c":[0.0,2.0]}}"#;
        let spec: EndomorphismSpec = serde_json::from_str(s).unwrap();
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EndomorphismSpec>(&back).unwrap(), spec);
        let h = r#"{"family":"conjugation","h":{"a":[0.0,1.0],"b":[1.0,0.0]}}"#;
        assert!(serde_json::from_str::<EndomorphismSpec>(h).is_ok());
    }

    fn arb_element() -> impl Strategy<Value = GroupElement> {
        (0.0..std::f64::consts::TAU, -3.0..3.0f64, -3.0..3.0f64)
            .prop_map(|(t, x, y)| GroupElement::from_angle(t, c(x, y)))
    }

    proptest! {
        #[test]
        fn builtins_are_homomorphisms(g in arb_element(), h in arb_element()) {
            for rho in builtins() {
                let l = rho.apply(&g.compose(&h));
                let r = rho.apply(&g).compose(&rho.apply(&h));
                prop_assert!(l.distance(&r) < 1e-10, "{:?}", rho);
            }
        }

        #[test]
        fn tau_beta_is_equivariant(seed in 0u64..1000) {
            for rho in builtins() {
                if let FixedPointSet::SinglePoint { beta } = xi_rho(&rho).unwrap() {
                    let t = tau_from_beta(&rho, beta).unwrap();
                    prop_assert!(check_equivariance(&rho, &t, 20, seed).max_residual <= 1e-10);
                }
            }
        }
    }
}
