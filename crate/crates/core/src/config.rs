//! JSON configuration of a magnetic system and the bundled example systems.
//!
//! A configuration names `(ν, μ, ρ, τ, Γ, χ)` plus the sampling parameters
//! used by the runner. Loading validates it by building the
//! [`MagneticSystem`]; any construction failure is reported with the
//! invariant that broke. `MAF_FD_STEP` overrides `fd_step`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automorphy::PseudoCharacter;
use crate::calculus::{Grid, DEFAULT_FD_STEP};
use crate::equivariant::{tau_from_beta, EndomorphismSpec, EquivariantMap};
use crate::highdim::TauN;
use crate::magnetics::MagneticSystem;
use crate::{DiscreteSubgroup, GroupElement, MafError, Result, C64};

/// Environment variable overriding `fd_step`.
pub const FD_STEP_ENV: &str = "MAF_FD_STEP";

const BUNDLED: [(&str, &str); 3] = [
    ("landau", include_str!("../systems/landau.json")),
    ("conjugate", include_str!("../systems/conjugate.json")),
    ("alteration", include_str!("../systems/alteration.json")),
];

/// How `τ` is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauSpec {
    Identity,
    Conjugate,
    /// `τ_β(z) = ρ([1, z])·β` for `β ∈ Ξ_ρ`.
    FromBeta { beta: C64 },
    /// `z ↦ αz + β`.
    Affine { alpha: C64, beta: C64 },
}

impl TauSpec {
    fn build(&self, rho: &crate::equivariant::Endomorphism) -> Result<EquivariantMap> {
        Ok(match self {
            TauSpec::Identity => EquivariantMap::identity(),
            TauSpec::Conjugate => EquivariantMap::conjugate(),
            TauSpec::FromBeta { beta } => tau_from_beta(rho, *beta)?,
            TauSpec::Affine { alpha, beta } => EquivariantMap::affine_map(*alpha, *beta),
        })
    }
}

/// Parameters for the quantization check when they differ from the system's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdqConfig {
    pub nu: f64,
    #[serde(default)]
    pub mu: Option<f64>,
    pub chi: Vec<C64>,
    #[serde(default = "default_word_len")]
    pub max_word_len: usize,
    /// A `ν` at which the same `χ` must fail (negative control).
    #[serde(default)]
    pub control_nu: Option<f64>,
}

fn default_word_len() -> usize {
    crate::automorphy::DEFAULT_RDQ_WORD_LEN
}

/// Spectral and kernel sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Largest Hermite degree `m` in the level check.
    pub m_max: usize,
    /// Strip indices `|n| ≤ n_max`.
    pub n_max: usize,
    /// Largest kernel level.
    pub kmax: usize,
    /// Whether to run the quadrature projector checks.
    pub projector: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { m_max: 3, n_max: 1, kmax: 2, projector: true }
    }
}

/// Expected verdicts of a constant-field case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedVerdicts {
    pub per_component: bool,
    pub direct: bool,
    pub agreement: bool,
}

/// One `ℂⁿ` constant-field case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighdimCase {
    pub name: String,
    pub n: usize,
    pub nu: f64,
    pub mu: f64,
    pub tau: TauN,
    pub expect: ExpectedVerdicts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighdimConfig {
    #[serde(default = "default_hd_radius")]
    pub radius: f64,
    #[serde(default = "default_hd_per_axis")]
    pub per_axis: usize,
    #[serde(default = "default_hd_tol")]
    pub tol: f64,
    pub cases: Vec<HighdimCase>,
}

fn default_hd_radius() -> f64 {
    1.0
}

fn default_hd_per_axis() -> usize {
    3
}

fn default_hd_tol() -> f64 {
    1e-6
}

/// A full system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub nu: f64,
    pub mu: f64,
    pub rho: EndomorphismSpec,
    pub tau: TauSpec,
    /// Generators of Γ.
    pub gamma: Vec<GroupElement>,
    /// `χ` on the generators.
    pub chi: Vec<C64>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Overrides the tolerance of every check that is expected to pass.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rdq: Option<RdqConfig>,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub highdim: Option<HighdimConfig>,
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| MafError::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sampling parameters and the system itself.
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(MafError::Config(format!("fd_step = {} must be positive", self.fd_step)));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(MafError::Config(format!("tol = {t} must be positive")));
            }
        }
        self.grid.validate().map_err(|e| MafError::Config(e.to_string()))?;
        if let Some(hd) = &self.highdim {
            for case in &hd.cases {
                crate::highdim::EquivariantMapN::new(case.n, case.tau.clone())
                    .map_err(|e| MafError::Config(format!("highdim case {}: {e}", case.name)))?;
            }
        }
        self.system().map(|_| ())
    }

    /// Builds and validates the magnetic system.
    pub fn system(&self) -> Result<MagneticSystem> {
        self.system_with(self.nu, self.mu, &self.chi)
    }

    /// The same `(ρ, τ, Γ)` with other `ν`, `μ`, `χ`.
    pub fn system_with(&self, nu: f64, mu: f64, chi: &[C64]) -> Result<MagneticSystem> {
        let wrap = |e: MafError| MafError::Config(format!("{}: {e}", self.name));
        let rho: crate::equivariant::Endomorphism = self.rho.clone().into();
        let tau = self.tau.build(&rho).map_err(wrap)?;
        let labels = (1..=self.gamma.len()).map(|k| format!("g{k}")).collect();
        let gamma = DiscreteSubgroup::new(self.gamma.clone(), labels).map_err(wrap)?;
        MagneticSystem::new(nu, mu, rho, tau, gamma, PseudoCharacter::new(chi.to_vec())).map_err(wrap)
    }

    /// Applies `MAF_FD_STEP` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(FD_STEP_ENV) {
            let h: f64 = v
                .trim()
                .parse()
                .map_err(|_| MafError::Config(format!("{FD_STEP_ENV}={v:?} is not a number")))?;
            if !(h.is_finite() && h > 0.0) {
                return Err(MafError::Config(format!("{FD_STEP_ENV}={v:?} must be positive")));
            }
            self.fd_step = h;
        }
        Ok(())
    }
}

/// Reads and validates a configuration file; `MAF_FD_STEP` is applied.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| MafError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = SystemConfig::from_json(&text)?;
    cfg.apply_env()?;
    Ok(cfg)
}

/// A file path, or the name of a bundled system (`landau`, `landau.json`, ...).
pub fn load_config_or_bundled(spec: &str) -> Result<SystemConfig> {
    if Path::new(spec).is_file() {
        return load_config(spec);
    }
    let mut cfg = bundled(spec.trim_end_matches(".json"))?;
    cfg.apply_env()?;
    Ok(cfg)
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// A bundled system by name (without `MAF_FD_STEP`).
pub fn bundled(name: &str) -> Result<SystemConfig> {
    let text = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| MafError::Config(format!("no file or bundled system named {name:?} (bundled: {})", bundled_names().join(", "))))?;
    SystemConfig::from_json(text)
}

/// The raw JSON of a bundled system.
pub fn bundled_json(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// `--grid` syntax: `N` (square `[−2, 2]²`), `R:N`, or `xmin,xmax,nx,ymin,ymax,ny`.
pub fn parse_grid_spec(spec: &str) -> Result<Grid> {
    if spec.contains(',') {
        return spec.parse::<Grid>().map_err(|e| MafError::Config(e.to_string()));
    }
    let bad = || MafError::Config(format!("bad grid spec {spec:?}: expected N, R:N or xmin,xmax,nx,ymin,ymax,ny"));
    let (r, n) = match spec.split_once(':') {
        Some((r, n)) => (r.trim().parse::<f64>().map_err(|_| bad())?, n.trim().parse::<usize>().map_err(|_| bad())?),
        None => (2.0, spec.trim().parse::<usize>().map_err(|_| bad())?),
    };
    let g = Grid::square(r, n);
    g.validate().map_err(|_| bad())?;
    Ok(g)
}
