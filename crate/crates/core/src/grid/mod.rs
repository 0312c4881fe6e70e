//! Cartesian grid, level-set geometry, interface extraction and quadrature.

mod hull;
mod interp;
mod levelset;
mod marching;
mod quadrature;
mod shapes;
pub(crate) mod spatial;

pub use hull::convex_hull;
pub use levelset::{curvature, reinitialize, signed_distance, LevelSet, REINIT_BAND_CHECK, SHAPE_MARGIN_CELLS};
pub use marching::{extract_boundary, BoundaryTrace, LoopInfo};
pub use quadrature::{boundary_integral, trace_integral, volume_integral, Integrand};
pub use shapes::{Shape, SourcePiece, SourceSpec, DISK_HULL_SAMPLES};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point = [f64; 2];

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Uniform node-centred Cartesian grid over a rectangle.
///
/// `nx`, `ny` count cells; nodes are indexed `(i, j)` with
/// `0 <= i <= nx`, `0 <= j <= ny` and stored row-major with `y` outer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(bbox: [f64; 4], nx: usize, ny: usize) -> Result<Self> {
        let [x0, y0, x1, y1] = bbox;
        if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
            return Err(Error::InvalidGrid("box must be finite".into()));
        }
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidGrid(format!("empty box {bbox:?}")));
        }
        if nx < Self::MIN_CELLS || ny < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells per axis, got {nx}x{ny}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { x0, y0, x1, y1, nx, ny })
    }

    /// Square box `[-half, half]^2` with `n` cells per axis.
    pub fn centered(half: f64, n: usize) -> Result<Self> {
        Self::new([-half, -half, half, half], n, n)
    }

    pub fn bbox(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    /// Smallest spacing; used as the length scale for tolerances.
    pub fn h(&self) -> f64 {
        self.hx().min(self.hy())
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn nodes_x(&self) -> usize {
        self.nx + 1
    }

    pub fn nodes_y(&self) -> usize {
        self.ny + 1
    }

    pub fn len(&self) -> usize {
        self.nodes_x() * self.nodes_y()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy()
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Point {
        [self.x(i), self.y(j)]
    }

    pub fn is_box_node(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// Cell containing `p` and the local coordinates in `[0, 1]^2`.
    pub fn locate(&self, p: Point) -> Option<(usize, usize, f64, f64)> {
        let fx = (p[0] - self.x0) / self.hx();
        let fy = (p[1] - self.y0) / self.hy();
        if !(fx >= 0.0 && fy >= 0.0 && fx <= self.nx as f64 && fy <= self.ny as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        Some((i, j, fx - i as f64, fy - j as f64))
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    /// Bilinear interpolation of node values at `p`; `None` outside the box.
    pub fn bilinear(&self, values: &[f64], p: Point) -> Option<f64> {
        let (i, j, tx, ty) = self.locate(p)?;
        let v00 = values[self.idx(i, j)];
        let v10 = values[self.idx(i + 1, j)];
        let v01 = values[self.idx(i, j + 1)];
        let v11 = values[self.idx(i + 1, j + 1)];
        Some(
            (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11),
        )
    }

    /// Centred-difference gradient at a node (one-sided on the box edge).
    pub fn node_gradient(&self, values: &[f64], i: usize, j: usize) -> Point {
        let (hx, hy) = (self.hx(), self.hy());
        let gx = if i == 0 {
            (values[self.idx(1, j)] - values[self.idx(0, j)]) / hx
        } else if i == self.nx {
            (values[self.idx(i, j)] - values[self.idx(i - 1, j)]) / hx
        } else {
            (values[self.idx(i + 1, j)] - values[self.idx(i - 1, j)]) / (2.0 * hx)
        };
        let gy = if j == 0 {
            (values[self.idx(i, 1)] - values[self.idx(i, 0)]) / hy
        } else if j == self.ny {
            (values[self.idx(i, j)] - values[self.idx(i, j - 1)]) / hy
        } else {
            (values[self.idx(i, j + 1)] - values[self.idx(i, j - 1)]) / (2.0 * hy)
        };
        [gx, gy]
    }

    /// Gradient at an arbitrary point: bilinear blend of node gradients.
    pub fn gradient_at(&self, values: &[f64], p: Point) -> Option<Point> {
        let (i, j, tx, ty) = self.locate(p)?;
        let g00 = self.node_gradient(values, i, j);
        let g10 = self.node_gradient(values, i + 1, j);
        let g01 = self.node_gradient(values, i, j + 1);
        let g11 = self.node_gradient(values, i + 1, j + 1);
        let mut g = [0.0; 2];
        for k in 0..2 {
            g[k] = (1.0 - ty) * ((1.0 - tx) * g00[k] + tx * g10[k])
                + ty * ((1.0 - tx) * g01[k] + tx * g11[k]);
        }
        Some(g)
    }

    pub fn node_iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nxn = self.nodes_x();
        (0..self.len()).map(move |k| (k % nxn, k / nxn))
    }
}

/// Grid-sampled scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        let values = grid.node_iter().map(|(i, j)| f(grid.node(i, j))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite field value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn sample(&self, p: Point) -> Option<f64> {
        self.grid.bilinear(&self.values, p)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Zero every node outside `{phi < 0}`.
    pub fn masked(mut self, ls: &LevelSet) -> Self {
        for (v, p) in self.values.iter_mut().zip(&ls.phi) {
            if *p >= 0.0 {
                *v = 0.0;
            }
        }
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grid() {
        assert!(Grid::centered(1.0, 8).is_err());
        assert!(Grid::new([0.0, 0.0, 0.0, 1.0], 32, 32).is_err());
    }

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let g = Grid::centered(1.0, 16).unwrap();
        let f = ScalarField::from_fn(g, |p| 2.0 * p[0] - 3.0 * p[1] + 0.5);
        let v = f.sample([0.123, -0.456]).unwrap();
        assert!((v - (2.0 * 0.123 + 3.0 * 0.456 + 0.5)).abs() < 1e-12);
        assert!(f.sample([1.5, 0.0]).is_none());
    }

    #[test]
    fn node_gradient_exact_for_quadratics_in_the_interior() {
        let g = Grid::centered(1.0, 20).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] * p[0] + p[0] * p[1]);
        let (i, j) = (7, 12);
        let [x, y] = g.node(i, j);
        let gr = g.node_gradient(&f.values, i, j);
        assert!((gr[0] - (2.0 * x + y)).abs() < 1e-12);
        assert!((gr[1] - x).abs() < 1e-12);
    }
}
