//! Gauss-Legendre rules and tensor-product quadrature on rectangles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::grid::Rect;
use crate::C64;

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn cache() -> &'static Mutex<HashMap<usize, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights of the `n`-point rule on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    if n == 1 {
        return Arc::new((vec![0.0], vec![2.0]));
    }
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

/// Tensor Gauss-Legendre with `n × n` nodes of `∫∫ f dx dy` over `rect`.
pub fn quad2d(f: impl Fn(C64) -> C64, rect: &Rect, n: usize) -> C64 {
    quad2d_composite(f, rect, 1, 1, n)
}

/// Composite tensor rule: `px × py` equal panels, `order × order` nodes each.
pub fn quad2d_composite(f: impl Fn(C64) -> C64, rect: &Rect, px: usize, py: usize, order: usize) -> C64 {
    QuadGrid::composite(rect, px, py, order).integrate(f)
}

/// Flattened quadrature nodes and weights over a rectangle.
#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
}

impl QuadGrid {
    pub fn composite(rect: &Rect, px: usize, py: usize, order: usize) -> Self {
        assert!(px >= 1 && py >= 1, "at least one panel per axis");
        let rule = gauss_legendre(order);
        let axis = |lo: f64, hi: f64, panels: usize| -> Vec<(f64, f64)> {
            let h = (hi - lo) / panels as f64;
            let mut out = Vec::with_capacity(panels * order);
            for p in 0..panels {
                let a = lo + p as f64 * h;
                for (x, w) in rule.0.iter().zip(&rule.1) {
                    out.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
                }
            }
            out
        };
        let xs = axis(rect.xmin, rect.xmax, px);
        let ys = axis(rect.ymin, rect.ymax, py);
        let mut nodes = Vec::with_capacity(xs.len() * ys.len());
        let mut weights = Vec::with_capacity(xs.len() * ys.len());
        for &(y, wy) in &ys {
            for &(x, wx) in &xs {
                nodes.push(C64::new(x, y));
                weights.push(wx * wy);
            }
        }
        Self { nodes, weights }
    }

    /// Composite rule with panels no wider than `max_panel` on each axis.
    pub fn with_panel_width(rect: &Rect, max_panel: f64, order: usize) -> Self {
        let px = ((rect.xmax - rect.xmin) / max_panel).ceil().max(1.0) as usize;
        let py = ((rect.ymax - rect.ymin) / max_panel).ceil().max(1.0) as usize;
        Self::composite(rect, px, py, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(C64) -> C64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    /// Integrate values already sampled at the nodes.
    pub fn integrate_values(&self, values: &[C64]) -> C64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, &w)| v * w).sum()
    }
}
