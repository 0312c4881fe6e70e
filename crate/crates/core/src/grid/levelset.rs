//! Level-set container, exact signed distances, reinitialization and
//! curvature.

use super::interp::quintic_jet;
use super::marching::interface_segments;
use super::spatial::SegmentIndex;
use super::{dist, Grid, Point, ScalarField, Shape};
use crate::{Error, Result};

/// Minimum clearance between a shape and the box, in units of `h`.
pub const SHAPE_MARGIN_CELLS: f64 = 5.0;

/// Half-width (in units of `h`) of the band where reinitialized level sets
/// satisfy `0.9 <= |grad phi| <= 1.1`.
pub const REINIT_BAND_CHECK: f64 = 5.0;

/// Node-sampled level-set function; the domain is `{phi < 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub grid: Grid,
    pub phi: Vec<f64>,
}

impl LevelSet {
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        Self { grid, phi: ScalarField::from_fn(grid, f).values }
    }

    pub fn from_values(grid: Grid, phi: Vec<f64>) -> Result<Self> {
        Ok(Self { grid, phi: ScalarField::from_values(grid, phi)?.values })
    }

    pub fn from_shape(shape: &Shape, grid: Grid) -> Result<Self> {
        signed_distance(shape, grid)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[self.grid.idx(i, j)]
    }

    pub fn sample(&self, p: Point) -> Option<f64> {
        self.grid.bilinear(&self.phi, p)
    }

    pub fn is_inside(&self, k: usize) -> bool {
        self.phi[k] < 0.0
    }

    pub fn interior_nodes(&self) -> usize {
        self.phi.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn has_interface(&self) -> bool {
        let n = self.interior_nodes();
        n > 0 && n < self.phi.len()
    }

    /// True when some interior node lies on the box boundary.
    pub fn touches_box(&self) -> bool {
        self.grid.node_iter().any(|(i, j)| self.grid.is_box_node(i, j) && self.at(i, j) < 0.0)
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.phi.clone() }
    }

    /// Pointwise `min(phi, other)`: the union of the two domains.
    pub fn union_with(&mut self, other: &LevelSet) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, &b) in self.phi.iter_mut().zip(&other.phi) {
            *a = a.min(b);
        }
    }

    /// Range of `|grad phi|` over interior grid nodes with `|phi| < band * h`.
    pub fn gradient_range(&self, band: f64) -> (f64, f64) {
        let g = &self.grid;
        let lim = band * g.h();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, j) in g.node_iter() {
            if g.is_box_node(i, j) || self.at(i, j).abs() >= lim {
                continue;
            }
            let n = super::norm(g.node_gradient(&self.phi, i, j));
            lo = lo.min(n);
            hi = hi.max(n);
        }
        (lo, hi)
    }
}

/// Exact signed distance to `shape` sampled on `grid`.
///
/// The shape must stay at least `5h` away from the box boundary.
pub fn signed_distance(shape: &Shape, grid: Grid) -> Result<LevelSet> {
    shape.validate()?;
    let margin = SHAPE_MARGIN_CELLS * grid.h();
    let b = shape.bounding_box();
    if b[0] - grid.x0 < margin
        || b[1] - grid.y0 < margin
        || grid.x1 - b[2] < margin
        || grid.y1 - b[3] < margin
    {
        return Err(Error::ShapeTouchesBox { margin });
    }
    Ok(LevelSet::from_fn(grid, |p| shape.signed_distance(p)))
}

/// Rebuild `phi` as the signed distance to its own zero set.
///
/// The zero set is first located by marching squares; every node is then
/// assigned the distance to the closest point on the zero set of a
/// piecewise quintic interpolant of `phi`, found by Newton iteration on the
/// closest-point conditions and started from the nearest polyline point.
/// Where the iteration fails the polyline distance is used. Signs are kept.
pub fn reinitialize(ls: &LevelSet) -> Result<LevelSet> {
    if !ls.has_interface() {
        return Err(Error::EmptyOrFull);
    }
    let grid = ls.grid;
    let h = grid.h();
    let segs = interface_segments(ls);
    if segs.is_empty() {
        return Err(Error::EmptyOrFull);
    }
    let index = SegmentIndex::new(&segs, 4.0 * h);
    let mut phi = Vec::with_capacity(ls.phi.len());
    let mut hint = None;
    for (i, j) in grid.node_iter() {
        let x = grid.node(i, j);
        let near = index.nearest_with_hint(x, hint).expect("segments are nonempty");
        hint = Some(near.segment);
        let (a, b) = segs[near.segment];
        let y0 = [a[0] + near.t * (b[0] - a[0]), a[1] + near.t * (b[1] - a[1])];
        let refined = closest_point(ls, x, y0).or_else(|| closest_point_search(ls, x, y0));
        let d = match refined {
            Some(y) if (dist(x, y) - near.distance).abs() <= 0.5 * h => dist(x, y),
            _ => near.distance,
        };
        phi.push(if ls.phi[grid.idx(i, j)] < 0.0 { -d } else { d });
    }
    Ok(LevelSet { grid, phi })
}

/// Closest point to `x` on the zero set of the quintic interpolant, starting
/// from the interface point `y0`. `None` if Newton does not settle within
/// `2h` of the start.
fn closest_point(ls: &LevelSet, x: Point, y0: Point) -> Option<Point> {
    let grid = &ls.grid;
    let h = grid.h();
    let mut y = y0;
    let j0 = quintic_jet(grid, &ls.phi, y)?;
    let g2 = j0.grad[0] * j0.grad[0] + j0.grad[1] * j0.grad[1];
    if g2 < 1e-20 {
        return None;
    }
    // x - y = mu grad p at the solution
    let mut mu = ((x[0] - y[0]) * j0.grad[0] + (x[1] - y[1]) * j0.grad[1]) / g2;
    for _ in 0..30 {
        let jet = quintic_jet(grid, &ls.phi, y)?;
        let [px, py] = jet.grad;
        let [hxx, hxy, hyy] = jet.hess;
        let r = [y[0] - x[0] + mu * px, y[1] - x[1] + mu * py, jet.value];
        // KKT matrix [[I + mu H, g], [g^T, 0]]
        let m = [
            [1.0 + mu * hxx, mu * hxy, px],
            [mu * hxy, 1.0 + mu * hyy, py],
            [px, py, 0.0],
        ];
        let step = match solve3(m, r) {
            Some(s) => [s[0], s[1], s[2]],
            None => {
                // singular tangential block (x near a centre of curvature):
                // plain projection onto the zero set
                let g2 = px * px + py * py;
                if g2 < 1e-20 {
                    return None;
                }
                let s = jet.value / g2;
                [s * px, s * py, 0.0]
            }
        };
        y = [y[0] - step[0], y[1] - step[1]];
        mu -= step[2];
        if !grid.contains(y) || dist(y, y0) > 2.0 * h {
            return None;
        }
        if step[0].abs().max(step[1].abs()) <= 1e-13 * h {
            break;
        }
    }
    let jet = quintic_jet(grid, &ls.phi, y)?;
    let gn = jet.grad[0].hypot(jet.grad[1]);
    (jet.value.abs() <= 1e-9 * h * gn.max(1e-12)).then_some(y)
}

/// Project `z` onto the zero set of the quintic interpolant along the
/// gradient.
fn project(ls: &LevelSet, mut z: Point) -> Option<Point> {
    let h = ls.grid.h();
    for _ in 0..20 {
        let jet = quintic_jet(&ls.grid, &ls.phi, z)?;
        let g2 = jet.grad[0] * jet.grad[0] + jet.grad[1] * jet.grad[1];
        if g2 < 1e-20 {
            return None;
        }
        if jet.value.abs() <= 1e-12 * h * g2.sqrt() {
            return Some(z);
        }
        let s = jet.value / g2;
        z = [z[0] - s * jet.grad[0], z[1] - s * jet.grad[1]];
    }
    None
}

/// Golden-section search for the closest zero-set point along the local
/// tangent at `y0`; used where Newton is ill-conditioned, typically when
/// `x` sits near a centre of curvature and many points are almost equally
/// close.
fn closest_point_search(ls: &LevelSet, x: Point, y0: Point) -> Option<Point> {
    let h = ls.grid.h();
    let jet = quintic_jet(&ls.grid, &ls.phi, y0)?;
    let gn = jet.grad[0].hypot(jet.grad[1]);
    if gn < 1e-10 {
        return None;
    }
    let t = [-jet.grad[1] / gn, jet.grad[0] / gn];
    let at = |s: f64| project(ls, [y0[0] + s * t[0], y0[1] + s * t[1]]);
    let cost = |s: f64| at(s).map_or(f64::INFINITY, |y| dist(x, y));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-h, h);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = cost(d);
        }
    }
    at(0.5 * (a + b))
}

/// Cramer's rule with a relative singularity guard.
fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let scale = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if d.abs() <= 1e-10 * scale.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut a = m;
        for row in 0..3 {
            a[row][c] = r[row];
        }
        *o = det(a) / d;
    }
    Some(out)
}

/// Mean curvature `div(grad phi / |grad phi|)` by centred differences.
///
/// Only nodes with `|phi| < 3h` are evaluated; other entries are zero.
pub fn curvature(ls: &LevelSet) -> Result<ScalarField> {
    let g = &ls.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let band = 3.0 * g.h();
    let mut out = ScalarField::zeros(*g);
    for (i, j) in g.node_iter() {
        let c = ls.at(i, j);
        if c.abs() >= band || g.is_box_node(i, j) {
            continue;
        }
        let (e, w) = (ls.at(i + 1, j), ls.at(i - 1, j));
        let (n, s) = (ls.at(i, j + 1), ls.at(i, j - 1));
        let px = (e - w) / (2.0 * hx);
        let py = (n - s) / (2.0 * hy);
        let pxx = (e - 2.0 * c + w) / (hx * hx);
        let pyy = (n - 2.0 * c + s) / (hy * hy);
        let pxy = (ls.at(i + 1, j + 1) - ls.at(i + 1, j - 1) - ls.at(i - 1, j + 1)
            + ls.at(i - 1, j - 1))
            / (4.0 * hx * hy);
        let gn = px.hypot(py);
        if gn < 0.1 {
            return Err(Error::SingularGradient { i, j, norm: gn });
        }
        out.values[g.idx(i, j)] =
            (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / gn.powi(3);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::extract_boundary;

    #[test]
    fn disk_distance_examples() {
        let g = Grid::centered(3.0, 60).unwrap();
        let ls = signed_distance(&Shape::disk([0.0, 0.0], 1.0), g).unwrap();
        let k = g.idx(50, 30);
        assert_eq!(g.node(50, 30), [2.0, 0.0]);
        assert!((ls.phi[k] - 1.0).abs() < 1e-15);
        assert_eq!(ls.at(30, 30), -1.0);
    }

    #[test]
    fn rejects_shape_near_box() {
        let g = Grid::centered(1.2, 64).unwrap();
        let r = signed_distance(&Shape::disk([0.0, 0.0], 1.1), g);
        assert!(matches!(r, Err(Error::ShapeTouchesBox { .. })));
    }

    #[test]
    fn reinit_fixed_point_on_exact_disk() {
        let g = Grid::centered(2.0, 64).unwrap();
        let ls = signed_distance(&Shape::disk([0.1, -0.05], 1.0), g).unwrap();
        let re = reinitialize(&ls).unwrap();
        let worst = ls.phi.iter().zip(&re.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6 * g.h(), "max change {worst:e}");
    }

    #[test]
    fn reinit_recovers_scaled_distance() {
        let g = Grid::centered(2.0, 64).unwrap();
        let ls = LevelSet::from_fn(g, |p| 3.0 * (super::super::norm(p) - 1.0));
        let re = reinitialize(&ls).unwrap();
        let (lo, hi) = re.gradient_range(REINIT_BAND_CHECK);
        assert!(lo >= 0.9 && hi <= 1.1, "{lo} {hi}");
        let t = extract_boundary(&re).unwrap();
        for p in &t.points {
            assert!((super::super::norm(*p) - 1.0).abs() <= 0.5 * g.h());
        }
    }

    #[test]
    fn reinit_uniform_sign_is_error() {
        let g = Grid::centered(1.0, 16).unwrap();
        let ls = LevelSet::from_fn(g, |_| 1.0);
        assert!(matches!(reinitialize(&ls), Err(Error::EmptyOrFull)));
    }

    #[test]
    fn curvature_of_circles_and_lines() {
        let g = Grid::centered(3.0, 128).unwrap();
        for r in [1.0, 2.0] {
            let ls = signed_distance(&Shape::disk([0.0, 0.0], r), g).unwrap();
            let k = curvature(&ls).unwrap();
            let t = extract_boundary(&ls).unwrap();
            for p in &t.points {
                let kv = k.sample(*p).unwrap();
                assert!((kv - 1.0 / r).abs() < 4.0 * g.h(), "r={r}: {kv}");
            }
        }
        let ls = LevelSet::from_fn(g, |p| p[0] - 0.3 * p[1] - 0.11);
        let k = curvature(&ls).unwrap();
        assert!(k.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn curvature_flags_flat_gradient() {
        let g = Grid::centered(1.0, 32).unwrap();
        let ls = LevelSet::from_fn(g, |p| 0.01 * (p[0] * p[0] + p[1] * p[1]) - 0.001);
        assert!(matches!(curvature(&ls), Err(Error::SingularGradient { .. })));
    }
}
