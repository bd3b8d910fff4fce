//! The rigid-motion group `G = U(1)⋉ℂ` and its finitely generated subgroups.
//!
//! An element `[a, b]` is the affine map `z ↦ az + b` with `|a| = 1`, i.e. the
//! matrix `((a, b), (0, 1))`. Composition is matrix multiplication.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MafError, Result};
use crate::C64;

/// Tolerance on `|a| = 1` at construction.
pub const UNIT_TOL: f64 = 1e-12;
/// Two elements closer than this (in `|Δa| + |Δb|`) are the same element.
pub const DEDUP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    a: C64,
    b: C64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
    };

    pub fn new(a: C64, b: C64) -> Result<Self> {
        let modulus = a.norm();
        if !modulus.is_finite() || (modulus - 1.0).abs() > UNIT_TOL || !b.is_finite() {
            return Err(MafError::InvalidElement { modulus });
        }
        Ok(Self { a, b })
    }

    /// Rotation by `angle` followed by translation by `b`.
    pub fn from_angle(angle: f64, b: C64) -> Self {
        Self { a: crate::cis(angle), b }
    }

    pub fn translation(b: C64) -> Self {
        Self { a: C64::new(1.0, 0.0), b }
    }

    pub fn rotation(a: C64) -> Result<Self> {
        Self::new(a, C64::new(0.0, 0.0))
    }

    /// Builds an element while forcing `|a| = 1`; for maps that are unitary
    /// by construction but accumulate rounding.
    pub(crate) fn renormalized(a: C64, b: C64) -> Self {
        Self { a: a / a.norm(), b }
    }

    #[inline]
    pub fn a(&self) -> C64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> C64 {
        self.b
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        Self::renormalized(self.a * other.a, self.a * other.b + self.b)
    }

    pub fn inverse(&self) -> GroupElement {
        let ac = self.a.conj();
        Self { a: ac, b: -ac * self.b }
    }

    #[inline]
    pub fn act(&self, z: C64) -> C64 {
        self.a * z + self.b
    }

    /// `|g·x − x|`, zero exactly when `g` lies in the stabilizer of `x`.
    pub fn stabilizer_residual(&self, x: C64) -> f64 {
        (self.act(x) - x).norm()
    }

    /// `|Δa| + |Δb|`.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (self.a - other.a).norm() + (self.b - other.b).norm()
    }

    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Self::IDENTITY, tol)
    }
}

impl Default for GroupElement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    a: [f64; 2],
    b: [f64; 2],
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRepr {
            a: [self.a.re, self.a.im],
            b: [self.b.re, self.b.im],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ElementRepr::deserialize(d)?;
        GroupElement::new(C64::new(r.a[0], r.a[1]), C64::new(r.b[0], r.b[1]))
            .map_err(serde::de::Error::custom)
    }
}

/// A letter of a word: generator `index`, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

/// Γ given by generators. Discreteness is smoke-tested at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSubgroup {
    generators: Vec<GroupElement>,
    labels: Vec<String>,
}

/// Word length used for the discreteness smoke test.
const DISCRETENESS_WORD_LEN: usize = 4;

impl DiscreteSubgroup {
    pub fn new(generators: Vec<GroupElement>, labels: Vec<String>) -> Result<Self> {
        let labels = if labels.is_empty() {
            (0..generators.len()).map(|i| format!("g{i}")).collect()
        } else {
            labels
        };
        if labels.len() != generators.len() {
            return Err(MafError::InvalidInput(format!(
                "{} labels for {} generators",
                labels.len(),
                generators.len()
            )));
        }
        let gamma = Self { generators, labels };
        gamma.check_discrete(DISCRETENESS_WORD_LEN)?;
        Ok(gamma)
    }

    pub fn trivial() -> Self {
        Self {
            generators: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Lattice of translations `ℤω₁ + ℤω₂`.
    pub fn lattice(w1: C64, w2: C64) -> Result<Self> {
        Self::new(
            vec![GroupElement::translation(w1), GroupElement::translation(w2)],
            vec!["t1".into(), "t2".into()],
        )
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn letter(&self, l: Letter) -> GroupElement {
        let g = self.generators[l.index];
        if l.inverse {
            g.inverse()
        } else {
            g
        }
    }

    /// All generators and their inverses, in a fixed order.
    pub fn alphabet(&self) -> Vec<Letter> {
        (0..self.generators.len())
            .flat_map(|index| {
                [
                    Letter { index, inverse: false },
                    Letter { index, inverse: true },
                ]
            })
            .collect()
    }

    fn check_discrete(&self, max_len: usize) -> Result<()> {
        for g in self.enumerate_words(max_len).iter().skip(1) {
            let d = (g.a - C64::new(1.0, 0.0)).norm() + g.b.norm();
            if d < 1e-9 {
                return Err(MafError::InvalidInput(format!(
                    "Γ is not discrete: element {g} is within {d:e} of the identity"
                )));
            }
        }
        Ok(())
    }

    /// Distinct products of at most `max_len` letters, identity first,
    /// in breadth-first order.
    pub fn enumerate_words(&self, max_len: usize) -> Vec<GroupElement> {
        self.enumerate_with_words(max_len)
            .into_iter()
            .map(|(g, _)| g)
            .collect()
    }

    /// Like [`enumerate_words`](Self::enumerate_words) but also returns a
    /// shortest word (left to right: `w[0]·w[1]·…`) for each element.
    pub fn enumerate_with_words(&self, max_len: usize) -> Vec<(GroupElement, Vec<Letter>)> {
        let mut out = vec![(GroupElement::IDENTITY, Vec::new())];
        let mut frontier = vec![0usize];
        let alphabet = self.alphabet();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for &idx in &frontier {
                for &l in &alphabet {
                    let (w, word) = &out[idx];
                    let g = self.letter(l).compose(w);
                    if out.iter().any(|(h, _)| h.approx_eq(&g, DEDUP_TOL)) {
                        continue;
                    }
                    let mut word = word.clone();
                    word.insert(0, l);
                    out.push((g, word));
                    next.push(out.len() - 1);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    /// Membership in the word closure of length `max_len`.
    pub fn contains(&self, g: &GroupElement, max_len: usize) -> bool {
        self.enumerate_words(max_len)
            .iter()
            .any(|h| h.approx_eq(g, 1e-9))
    }
}
