use crate::calculus::{QuadGrid, Rect, ScalarField};
use crate::equivariant::EquivariantMap;
use crate::magnetics::MagneticSystem;
use crate::{MafError, Result, C64};

/// `⟨f, g⟩ = ∫_D f ḡ e^{-ν|z|² - μ(|Eτ|² - |Ēτ|²)} dλ` with `E = z∂` and
/// `Ē = z̄∂̄`.
#[derive(Debug, Clone)]
pub struct WeightedInnerProduct {
    pub nu: f64,
    pub mu: f64,
    pub tau: EquivariantMap,
    pub domain: Rect,
}

impl WeightedInnerProduct {
    pub fn new(nu: f64, mu: f64, tau: EquivariantMap, domain: Rect) -> Self {
        Self { nu, mu, tau, domain }
    }

    pub fn for_system(sys: &MagneticSystem, domain: Rect) -> Self {
        Self::new(sys.nu(), sys.mu(), sys.tau().clone(), domain)
    }

    /// Unweighted `L²(D, dλ)` product.
    pub fn flat(domain: Rect) -> Self {
        Self::new(0.0, 0.0, EquivariantMap::identity(), domain)
    }

    /// `(Eτ, Ēτ)` at `z`.
    pub fn euler(&self, z: C64) -> Result<(C64, C64)> {
        let (d, db) = self.tau.field().wirtinger(z)?;
        Ok((z * d, z.conj() * db))
    }

    pub fn weight(&self, z: C64) -> Result<f64> {
        let mut e = -self.nu * z.norm_sqr();
        if self.mu != 0.0 {
            let (a, b) = self.euler(z)?;
            e -= self.mu * (a.norm_sqr() - b.norm_sqr());
        }
        let w = e.exp();
        if !(w.is_finite() && w > 0.0) {
            return Err(MafError::NonFinite { context: "inner product weight", z });
        }
        Ok(w)
    }

    /// Quadrature with `n_quad`-point panels of width at most `1/2`.
    pub fn inner(&self, f: &ScalarField, g: &ScalarField, n_quad: usize) -> Result<C64> {
        if n_quad == 0 {
            return Err(MafError::InvalidInput("n_quad must be positive".into()));
        }
        let grid = QuadGrid::with_panel_width(&self.domain, 0.5, n_quad);
        let mut acc = C64::new(0.0, 0.0);
        for (&z, &w) in grid.nodes.iter().zip(&grid.weights) {
            acc += f.try_eval(z)? * g.try_eval(z)?.conj() * (self.weight(z)? * w);
        }
        Ok(acc)
    }

    pub fn norm(&self, f: &ScalarField, n_quad: usize) -> Result<f64> {
        Ok(self.inner(f, f, n_quad)?.re.max(0.0).sqrt())
    }
}

pub fn weighted_inner_product(
    wip: &WeightedInnerProduct,
    f: &ScalarField,
    g: &ScalarField,
    n_quad: usize,
) -> Result<C64> {
    wip.inner(f, g, n_quad)
}
