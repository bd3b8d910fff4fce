use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MafError;
use crate::C64;

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self { xmin, xmax, ymin, ymax }
    }

    /// `[−r, r]²`.
    pub fn square(r: f64) -> Self {
        Self::new(-r, r, -r, r)
    }

    /// Square of half-width `r` centred at `c`.
    pub fn centered(c: C64, r: f64) -> Self {
        Self::new(c.re - r, c.re + r, c.im - r, c.im + r)
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    /// Counter-clockwise boundary polyline, closed.
    pub fn boundary(&self) -> Vec<C64> {
        vec![
            C64::new(self.xmin, self.ymin),
            C64::new(self.xmax, self.ymin),
            C64::new(self.xmax, self.ymax),
            C64::new(self.xmin, self.ymax),
            C64::new(self.xmin, self.ymin),
        ]
    }
}

/// Uniform sampling grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub nx: usize,
    pub ymin: f64,
    pub ymax: f64,
    pub ny: usize,
}

impl Default for Grid {
    /// 41 × 41 points on `[−2, 2]²`.
    fn default() -> Self {
        Self::square(2.0, 41)
    }
}

impl Grid {
    pub fn square(r: f64, n: usize) -> Self {
        Self { xmin: -r, xmax: r, nx: n, ymin: -r, ymax: r, ny: n }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coord(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Row-major points (x fastest).
    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.ny).flat_map(move |j| {
            let y = Self::coord(self.ymin, self.ymax, self.ny, j);
            (0..self.nx).map(move |i| C64::new(Self::coord(self.xmin, self.xmax, self.nx, i), y))
        })
    }

    pub fn validate(&self) -> Result<(), MafError> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.xmin > self.xmax || self.ymin > self.ymax || self.nx == 0 || self.ny == 0 {
            return Err(MafError::InvalidInput(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = MafError;

    /// `"xmin,xmax,nx,ymin,ymax,ny"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || MafError::InvalidInput(format!("grid spec '{s}' is not xmin,xmax,nx,ymin,ymax,ny"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
        let n = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        let g = Grid {
            xmin: f(0)?,
            xmax: f(1)?,
            nx: n(2)?,
            ymin: f(3)?,
            ymax: f(4)?,
            ny: n(5)?,
        };
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_cover_corners() {
        let g = Grid::default();
        let pts: Vec<C64> = g.points().collect();
        assert_eq!(pts.len(), 41 * 41);
        assert_eq!(pts[0], C64::new(-2.0, -2.0));
        assert_eq!(pts[pts.len() - 1], C64::new(2.0, 2.0));
    }

    #[test]
    fn parse_grid_spec() {
        let g: Grid = "-1,1,3,0,2,5".parse().unwrap();
        assert_eq!((g.nx, g.ny, g.ymax), (3, 5, 2.0));
        assert!("1,2,3".parse::<Grid>().is_err());
        assert!("1,0,3,0,1,3".parse::<Grid>().is_err());
    }
}
