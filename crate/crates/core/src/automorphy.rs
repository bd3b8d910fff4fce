//! Automorphic factors, pseudo-characters and the quantization condition.
//!
//! `j^α(g, z) = exp(−iα Im⟨z, g⁻¹·0⟩)` and the mixed factor
//! `J(γ, z) = χ(γ) j^ν(γ, z) j^μ(ρ(γ), τ(z))`. The product
//! `j^ν(γ, z) j^μ(ρ(γ), τ(z))` fails to be a cocycle by the z-independent
//! phase `exp(−iφ(γ, γ′))`, where
//! `φ(g, g′) = Im(ν⟨g⁻¹·0, g′·0⟩ + μ⟨ρ(g⁻¹)·0, ρ(g′)·0⟩)`.
//! Hence `J` is an exact cocycle iff `χ(γγ′) = χ(γ)χ(γ′) exp(iφ(γ, γ′))`,
//! which is the relation used both to extend `χ` from the generators and
//! to test it.

use serde::{Deserialize, Serialize};

use crate::calculus::{Grid, ScalarField};
use crate::equivariant::{Endomorphism, EquivariantMap};
use crate::error::{MafError, Result};
use crate::group::{DiscreteSubgroup, GroupElement, Letter, DEDUP_TOL};
use crate::report::{CheckReport, Residuals};
use crate::{cis, herm, C64};

/// Default word-length cap for the quantization check.
pub const DEFAULT_RDQ_WORD_LEN: usize = 4;
/// Default tolerance for the quantization check.
pub const RDQ_TOL: f64 = 1e-10;

const ORIGIN: C64 = C64::new(0.0, 0.0);

/// `exp(−iα Im(z · conj(g⁻¹·0)))`.
pub fn j_factor(alpha: f64, g: &GroupElement, z: C64) -> C64 {
    let o = g.inverse().act(ORIGIN);
    cis(-alpha * herm(z, o).im)
}

/// `Im(ν⟨g⁻¹·0, g′·0⟩ + μ⟨ρ(g⁻¹)·0, ρ(g′)·0⟩)`.
pub fn phase(nu: f64, mu: f64, rho: &Endomorphism, g: &GroupElement, gp: &GroupElement) -> f64 {
    let gi = g.inverse();
    let flat = herm(gi.act(ORIGIN), gp.act(ORIGIN));
    let twisted = herm(rho.apply(&gi).act(ORIGIN), rho.apply(gp).act(ORIGIN));
    (flat * nu + twisted * mu).im
}

/// The character-free part of the mixed factor together with its data.
#[derive(Debug, Clone)]
pub struct MixedFactor {
    pub nu: f64,
    pub mu: f64,
    pub rho: Endomorphism,
    pub tau: EquivariantMap,
}

impl MixedFactor {
    pub fn new(nu: f64, mu: f64, rho: Endomorphism, tau: EquivariantMap) -> Self {
        Self { nu, mu, rho, tau }
    }

    /// `j^ν(γ, z) j^μ(ρ(γ), τ(z))`.
    pub fn free(&self, g: &GroupElement, z: C64) -> C64 {
        j_factor(self.nu, g, z) * j_factor(self.mu, &self.rho.apply(g), self.tau.eval(z))
    }

    pub fn phase(&self, g: &GroupElement, gp: &GroupElement) -> f64 {
        phase(self.nu, self.mu, &self.rho, g, gp)
    }

    /// `free(γγ′, z) / (free(γ, γ′·z) free(γ′, z))`.
    pub fn cocycle_defect(&self, g: &GroupElement, gp: &GroupElement, z: C64) -> C64 {
        self.free(&g.compose(gp), z) / (self.free(g, gp.act(z)) * self.free(gp, z))
    }

    /// Spread `max |defect(z) − defect(z₀)|` over the grid, with `z₀` the first point.
    pub fn defect_spread(&self, g: &GroupElement, gp: &GroupElement, grid: &Grid) -> CheckReport {
        let mut acc = Residuals::new();
        let mut first = None;
        for z in grid.points() {
            let d = self.cocycle_defect(g, gp, z);
            let d0 = *first.get_or_insert(d);
            acc.push((d - d0).norm());
        }
        acc.report("cocycle_defect_spread", 1e-9)
    }

    /// `max_z |defect(z) − exp(i·k·φ(γ, γ′))|`.
    pub fn defect_vs_phase(&self, g: &GroupElement, gp: &GroupElement, k: f64, grid: &Grid) -> CheckReport {
        let target = cis(k * self.phase(g, gp));
        let mut acc = Residuals::new();
        for z in grid.points() {
            acc.push((self.cocycle_defect(g, gp, z) - target).norm());
        }
        acc.report("cocycle_defect_vs_phase", 1e-9).with_meta("exponent_multiple", k)
    }
}

/// Values of `χ` on the generators of Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoCharacter {
    pub values_on_generators: Vec<C64>,
}

impl PseudoCharacter {
    pub fn new(values: Vec<C64>) -> Self {
        Self { values_on_generators: values }
    }

    pub fn trivial(rank: usize) -> Self {
        Self::new(vec![C64::new(1.0, 0.0); rank])
    }

    /// Largest `||χ(s)| − 1|` over the generators.
    pub fn unimodularity_defect(&self) -> f64 {
        self.values_on_generators
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `χ(s)` for a generator and `conj χ(s)` for its inverse.
    pub fn letter(&self, l: Letter) -> C64 {
        let v = self.values_on_generators[l.index];
        if l.inverse {
            v.conj()
        } else {
            v
        }
    }
}

/// Sign convention in the quantization relation `χ(γγ′) = χ(γ)χ(γ′)·e^{…}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdqExponent {
    /// `exp(+iφ)`: exactly the condition for `J` to be a cocycle.
    PlusPhase,
    /// `exp(−2iφ)`.
    MinusTwoPhase,
}

impl RdqExponent {
    pub fn factor(self, phi: f64) -> C64 {
        match self {
            RdqExponent::PlusPhase => cis(phi),
            RdqExponent::MinusTwoPhase => cis(-2.0 * phi),
        }
    }
}

/// `χ` on the word closure of Γ up to a fixed length.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    elements: Vec<GroupElement>,
    values: Vec<C64>,
    words: Vec<Vec<Letter>>,
    max_len: usize,
    /// Largest disagreement between two factorizations reaching the same element.
    discrepancy: f64,
}

impl CharacterTable {
    /// Breadth-first extension `χ(s·w) = χ(s) χ(w) e^{iφ(s, w)}`.
    pub fn extend(
        gamma: &DiscreteSubgroup,
        chi: &PseudoCharacter,
        nu: f64,
        mu: f64,
        rho: &Endomorphism,
        max_len: usize,
    ) -> Result<Self> {
        Self::extend_with(gamma, chi, nu, mu, rho, max_len, RdqExponent::PlusPhase)
    }

    pub fn extend_with(
        gamma: &DiscreteSubgroup,
        chi: &PseudoCharacter,
        nu: f64,
        mu: f64,
        rho: &Endomorphism,
        max_len: usize,
        exponent: RdqExponent,
    ) -> Result<Self> {
        if chi.values_on_generators.len() != gamma.rank() {
            return Err(MafError::InvalidInput(format!(
                "χ has {} values for {} generators",
                chi.values_on_generators.len(),
                gamma.rank()
            )));
        }
        let mut t = Self {
            elements: vec![GroupElement::IDENTITY],
            values: vec![C64::new(1.0, 0.0)],
            words: vec![Vec::new()],
            max_len,
            discrepancy: 0.0,
        };
        let alphabet = gamma.alphabet();
        let mut frontier = vec![0usize];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for &w in &frontier {
                for &l in &alphabet {
                    let s = gamma.letter(l);
                    let (wg, wv) = (t.elements[w], t.values[w]);
                    let g = s.compose(&wg);
                    let v = chi.letter(l) * wv * exponent.factor(phase(nu, mu, rho, &s, &wg));
                    match t.position(&g) {
                        Some(k) => t.discrepancy = t.discrepancy.max((t.values[k] - v).norm()),
                        None => {
                            let mut word = t.words[w].clone();
                            word.insert(0, l);
                            t.elements.push(g);
                            t.values.push(v);
                            t.words.push(word);
                            next.push(t.elements.len() - 1);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(t)
    }

    /// Table of an explicitly given function on the word closure.
    pub fn from_fn(gamma: &DiscreteSubgroup, max_len: usize, f: impl Fn(&GroupElement) -> C64) -> Self {
        let (elements, words): (Vec<_>, Vec<_>) = gamma.enumerate_with_words(max_len).into_iter().unzip();
        let values = elements.iter().map(&f).collect();
        Self {
            elements,
            values,
            words,
            max_len,
            discrepancy: 0.0,
        }
    }

    fn position(&self, g: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|h| h.approx_eq(g, DEDUP_TOL))
    }

    pub fn get(&self, g: &GroupElement) -> Result<C64> {
        self.position(g)
            .map(|k| self.values[k])
            .ok_or_else(|| MafError::UnknownElement(g.to_string()))
    }

    pub fn word(&self, g: &GroupElement) -> Option<&[Letter]> {
        self.position(g).map(|k| self.words[k].as_slice())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Disagreement between factorizations found while extending.
    pub fn well_definedness(&self) -> CheckReport {
        CheckReport::scalar("pseudo_character_well_defined", self.discrepancy, 1e-9)
            .with_meta("word_len", self.max_len)
    }
}

fn word_json(w: &[Letter]) -> serde_json::Value {
    serde_json::Value::Array(
        w.iter()
            .map(|l| {
                let i = l.index as i64 + 1;
                serde_json::Value::from(if l.inverse { -i } else { i })
            })
            .collect(),
    )
}

/// Quantization residual `max |χ(γγ′) − χ(γ)χ(γ′)·e^{…}|` over word pairs.
///
/// Words are reported as signed 1-based generator indices (`-k` is the
/// inverse of generator `k`).
#[allow(clippy::too_many_arguments)]
pub fn rdq_check_table(
    nu: f64,
    mu: f64,
    rho: &Endomorphism,
    gamma: &DiscreteSubgroup,
    table: &CharacterTable,
    max_word_len: usize,
    exponent: RdqExponent,
    tol: f64,
) -> Result<CheckReport> {
    let words = gamma.enumerate_with_words(max_word_len);
    let mut acc = Residuals::new();
    let mut worst: Option<(usize, usize)> = None;
    for (i, (g, _)) in words.iter().enumerate() {
        let cg = table.get(g)?;
        for (j, (gp, _)) in words.iter().enumerate() {
            let lhs = table.get(&g.compose(gp))?;
            let rhs = cg * table.get(gp)? * exponent.factor(phase(nu, mu, rho, g, gp));
            let r = (lhs - rhs).norm();
            if worst.is_none() || r > acc.max() {
                worst = Some((i, j));
            }
            acc.push(r);
        }
    }
    let mut rep = acc
        .report("rdq", tol)
        .with_meta("nu", nu)
        .with_meta("mu", mu)
        .with_meta("max_word_len", max_word_len)
        .with_meta(
            "convention",
            match exponent {
                RdqExponent::PlusPhase => "chi(g g') = chi(g) chi(g') exp(+i phase)",
                RdqExponent::MinusTwoPhase => "chi(g g') = chi(g) chi(g') exp(-2i phase)",
            },
        );
    if let Some((i, j)) = worst {
        rep = rep.with_meta(
            "worst_pair",
            serde_json::json!([word_json(&words[i].1), word_json(&words[j].1)]),
        );
    }
    Ok(rep)
}

/// Extends `χ` from the generators and checks the quantization relation on
/// all pairs of words of length at most `max_word_len`.
pub fn rdq_check(
    nu: f64,
    mu: f64,
    rho: &Endomorphism,
    gamma: &DiscreteSubgroup,
    chi: &PseudoCharacter,
    max_word_len: usize,
) -> Result<CheckReport> {
    let table = CharacterTable::extend(gamma, chi, nu, mu, rho, 2 * max_word_len)?;
    let rep = rdq_check_table(nu, mu, rho, gamma, &table, max_word_len, RdqExponent::PlusPhase, RDQ_TOL)?;
    Ok(rep.with_meta("unimodularity_defect", chi.unimodularity_defect()))
}

/// `χ(γ) j^ν(γ, z) j^μ(ρ(γ), τ(z))`.
pub fn mixed_factor(factor: &MixedFactor, chi: &CharacterTable, g: &GroupElement, z: C64) -> Result<C64> {
    Ok(chi.get(g)? * factor.free(g, z))
}

/// `max_grid |F(γ·z) − J(γ, z) F(z)|`.
pub fn functional_equation_residual(
    f: &ScalarField,
    factor: &MixedFactor,
    chi: &CharacterTable,
    g: &GroupElement,
    grid: &Grid,
    tol: f64,
) -> Result<CheckReport> {
    let c = chi.get(g)?;
    let mut acc = Residuals::new();
    for z in grid.points() {
        acc.push((f.eval(g.act(z)) - c * factor.free(g, z) * f.eval(z)).norm());
    }
    Ok(acc.report("functional_equation", tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn t(b: C64) -> GroupElement {
        GroupElement::translation(b)
    }

    fn square() -> DiscreteSubgroup {
        DiscreteSubgroup::lattice(c(1.0, 0.0), c(0.0, 1.0)).unwrap()
    }

    fn landau(nu: f64) -> MixedFactor {
        MixedFactor::new(nu, 0.0, Endomorphism::Identity, EquivariantMap::identity())
    }

    fn conj_system() -> MixedFactor {
        MixedFactor::new(2.0, 1.0, Endomorphism::ComplexConjugate, EquivariantMap::conjugate())
    }

    #[test]
    fn j_factor_examples() {
        let z = c(0.4, -2.0);
        assert_eq!(j_factor(1.3, &GroupElement::IDENTITY, z), c(1.0, 0.0));
        assert!((j_factor(1.0, &t(c(1.0, 0.0)), crate::I) - cis(1.0)).norm() < 1e-15);
        assert_eq!(j_factor(0.0, &t(c(5.0, 1.0)), z), c(1.0, 0.0));
    }

    #[test]
    fn phase_examples() {
        let rho = Endomorphism::Identity;
        let (g, gp) = (t(c(1.0, 0.0)), t(c(0.0, 1.0)));
        assert_eq!(phase(1.0, 0.0, &rho, &GroupElement::IDENTITY, &gp), 0.0);
        assert_eq!(phase(1.0, 0.0, &rho, &g, &GroupElement::IDENTITY), 0.0);
        assert!((phase(1.0, 0.0, &rho, &g, &gp) - 1.0).abs() < 1e-15);
        assert!((phase(0.0, 1.0, &Endomorphism::ComplexConjugate, &g, &gp) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_factor_examples() {
        let gamma = DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap();
        let mf = conj_system();
        let table = CharacterTable::extend(&gamma, &PseudoCharacter::trivial(1), 2.0, 1.0, &mf.rho, 3).unwrap();
        let z = crate::I;
        assert_eq!(mixed_factor(&mf, &table, &GroupElement::IDENTITY, z).unwrap(), c(1.0, 0.0));
        // componentwise oracle for γ = [1, 1], z = i: γ⁻¹·0 = −1 so j² = e^{2i};
        // ρ(γ) = [1, 1], τ(i) = −i gives j¹ = e^{−i}
        let g = t(c(1.0, 0.0));
        let expect = cis(2.0) * cis(-1.0);
        assert!((mixed_factor(&mf, &table, &g, z).unwrap() - expect).norm() < 1e-14);
        // μ = 0 reduces to j^ν
        let l = landau(0.7);
        assert!((l.free(&g, z) - j_factor(0.7, &g, z)).norm() < 1e-15);
        assert!(matches!(
            mixed_factor(&mf, &table, &t(c(0.5, 0.0)), z),
            Err(MafError::UnknownElement(_))
        ));
    }

    #[test]
    fn defect_is_exp_minus_i_phase() {
        let (g, gp) = (t(c(1.0, 0.0)), t(c(0.0, 1.0)));
        let grid = Grid::square(2.0, 11);
        assert!(landau(PI).defect_spread(&GroupElement::IDENTITY, &gp, &grid).max_residual < 1e-15);
        for mf in [landau(PI), conj_system()] {
            assert!(mf.defect_spread(&g, &gp, &grid).pass);
            assert!(mf.defect_vs_phase(&g, &gp, -1.0, &grid).pass);
        }
        assert!((landau(PI).cocycle_defect(&g, &gp, c(0.3, 0.3)) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn rdq_examples() {
        let rho = Endomorphism::Identity;
        let chi = PseudoCharacter::trivial(2);
        let pass = rdq_check(PI, 0.0, &rho, &square(), &chi, 4).unwrap();
        assert!(pass.pass && pass.max_residual <= 1e-10, "{pass:?}");
        let fail = rdq_check(1.0, 0.0, &rho, &square(), &chi, 4).unwrap();
        assert!(!fail.pass && fail.max_residual > 0.1);
        let line = DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap();
        for nu in [0.3, 1.0, 7.0] {
            assert!(rdq_check(nu, 0.0, &rho, &line, &PseudoCharacter::trivial(1), 4).unwrap().pass);
        }
    }

    #[test]
    fn extension_reproduces_checkerboard_character() {
        let table = CharacterTable::extend(&square(), &PseudoCharacter::trivial(2), PI, 0.0, &Endomorphism::Identity, 6).unwrap();
        assert!(table.well_definedness().pass);
        for g in table.elements() {
            let (m, n) = (g.b().re.round() as i64, g.b().im.round() as i64);
            let expect = if (m * n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((table.get(g).unwrap() - expect).norm() < 1e-12, "{g}");
        }
    }

    #[test]
    fn exact_cocycle_under_quantization() {
        let mf = landau(PI);
        let gamma = square();
        let table = CharacterTable::extend(&gamma, &PseudoCharacter::trivial(2), PI, 0.0, &mf.rho, 4).unwrap();
        let words = gamma.enumerate_words(2);
        let z = c(0.37, -0.81);
        for g in &words {
            for gp in &words {
                let lhs = mixed_factor(&mf, &table, &g.compose(gp), z).unwrap();
                let rhs = mixed_factor(&mf, &table, g, gp.act(z)).unwrap() * mixed_factor(&mf, &table, gp, z).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn non_unimodular_chi_fails() {
        let line = DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap();
        let chi = PseudoCharacter::new(vec![c(2.0, 0.0)]);
        let rep = rdq_check(1.0, 0.0, &Endomorphism::Identity, &line, &chi, 2).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn functional_equation_examples() {
        let line = DiscreteSubgroup::new(vec![t(c(1.0, 0.0))], vec![]).unwrap();
        let nu = 1.0;
        let alpha = 0.25;
        let mf = landau(nu);
        let chi = PseudoCharacter::new(vec![cis(2.0 * PI * alpha)]);
        let table = CharacterTable::extend(&line, &chi, nu, 0.0, &mf.rho, 2).unwrap();
        let grid = Grid::square(1.0, 13);
        let g = t(c(1.0, 0.0));
        let zero = ScalarField::constant(c(0.0, 0.0));
        assert_eq!(functional_equation_residual(&zero, &mf, &table, &g, &grid, 1e-8).unwrap().max_residual, 0.0);
        // truncated theta-like sum: exp(−ν|z|²/2 + νz²/2) Σ_n c_n exp(2πi(n+α)z)
        let theta = ScalarField::new(move |z: C64| {
            let g = (-(nu / 2.0) * z.norm_sqr() + z * z * (nu / 2.0)).exp();
            let s: C64 = (-1..=1)
                .map(|n: i32| (crate::I * 2.0 * PI * (n as f64 + alpha) * z).exp() / (1.0 + (n * n) as f64))
                .sum();
            g * s
        });
        assert!(functional_equation_residual(&theta, &mf, &table, &g, &grid, 1e-8).unwrap().pass);
        let one = ScalarField::constant(c(1.0, 0.0));
        assert!(functional_equation_residual(&one, &mf, &table, &g, &grid, 1e-8).unwrap().max_residual > 0.1);
    }

    proptest! {
        #[test]
        fn factors_are_unimodular(alpha in -5.0..5.0f64, t0 in 0.0..6.3f64, bx in -3.0..3.0f64, by in -3.0..3.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64) {
            let g = GroupElement::from_angle(t0, c(bx, by));
            prop_assert!((j_factor(alpha, &g, c(x, y)).norm() - 1.0).abs() < 1e-12);
            prop_assert!((conj_system().free(&g, c(x, y)).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn defect_independent_of_z(t0 in 0.0..6.3f64, t1 in 0.0..6.3f64, bx in -2.0..2.0f64, by in -2.0..2.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let g = GroupElement::from_angle(t0, c(bx, by));
            let gp = GroupElement::from_angle(t1, c(by, -bx));
            let mf = conj_system();
            let d0 = mf.cocycle_defect(&g, &gp, c(0.0, 0.0));
            prop_assert!((mf.cocycle_defect(&g, &gp, c(x, y)) - d0).norm() < 1e-9);
            prop_assert!((d0 - cis(-mf.phase(&g, &gp))).norm() < 1e-9);
        }
    }
}
