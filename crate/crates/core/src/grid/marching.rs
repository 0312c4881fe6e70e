//! Marching-squares extraction of the zero level set.

use std::collections::HashMap;
use std::io::Write;

use super::{dist, norm, LevelSet, Point};
use crate::{Error, Result};

/// One polyline of the extracted interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopInfo {
    pub start: usize,
    pub len: usize,
    /// `false` when the polyline runs into the box boundary.
    pub closed: bool,
}

/// Polyline representation of `{phi = 0}` with per-vertex quadrature data.
///
/// Loops are oriented with the interior `{phi < 0}` on the left, so closed
/// outer boundaries run counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub points: Vec<Point>,
    /// Outward unit normals.
    pub normals: Vec<Point>,
    /// Trapezoid arclength weights; they sum to the total length.
    pub weights: Vec<f64>,
    pub loop_id: Vec<usize>,
    pub loops: Vec<LoopInfo>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_loops(&self) -> usize {
        self.loops.len()
    }

    pub fn has_open(&self) -> bool {
        self.loops.iter().any(|l| !l.closed)
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Trapezoid rule for node-attached values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.weights.iter().zip(&self.points).map(|(w, &p)| w * f(p)).sum()
    }

    /// Integral restricted to vertices where `mask` is true.
    pub fn integrate_masked(&self, values: &[f64], mask: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((w, v), _)| w * v)
            .sum()
    }

    pub fn loop_points(&self, k: usize) -> &[Point] {
        let l = self.loops[k];
        &self.points[l.start..l.start + l.len]
    }

    /// Consecutive vertex pairs (including the closing pair of closed loops),
    /// as `(a, b, index_a, index_b)`.
    pub fn segments(&self) -> Vec<(Point, Point, usize, usize)> {
        let mut out = Vec::with_capacity(self.len());
        for l in &self.loops {
            let n = l.len;
            let last = if l.closed { n } else { n.saturating_sub(1) };
            for k in 0..last {
                let a = l.start + k;
                let b = l.start + (k + 1) % n;
                out.push((self.points[a], self.points[b], a, b));
            }
        }
        out
    }

    /// Signed enclosed area by the shoelace formula over closed loops.
    pub fn enclosed_area(&self) -> f64 {
        self.loops
            .iter()
            .filter(|l| l.closed)
            .map(|l| {
                let p = &self.points[l.start..l.start + l.len];
                let n = p.len();
                0.5 * (0..n).map(|k| super::cross(p[k], p[(k + 1) % n])).sum::<f64>()
            })
            .sum()
    }

    /// CSV `loop_id,x,y` with vertices in loop order.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "loop_id,x,y")?;
        for (p, id) in self.points.iter().zip(&self.loop_id) {
            writeln!(w, "{},{},{}", id, p[0], p[1])?;
        }
        Ok(())
    }
}

/// Oriented per-cell segments between edge crossings: `(start_edge, end_edge)`.
pub(crate) fn cell_segments(ls: &LevelSet) -> Vec<(usize, usize)> {
    let g = &ls.grid;
    let phi = &ls.phi;
    let inside = |v: f64| v < 0.0;
    let mut segs = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = [g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)];
            let v = [phi[c[0]], phi[c[1]], phi[c[2]], phi[c[3]]];
            let ins = [inside(v[0]), inside(v[1]), inside(v[2]), inside(v[3])];
            if ins.iter().all(|&b| b) || ins.iter().all(|&b| !b) {
                continue;
            }
            let edges = [
                edge_id(g.nx, i, j, false),
                edge_id(g.nx, i + 1, j, true),
                edge_id(g.nx, i, j + 1, false),
                edge_id(g.nx, i, j, true),
            ];
            let mut in_out = [usize::MAX; 2];
            let mut out_in = [usize::MAX; 2];
            let (mut a, mut b) = (0, 0);
            for k in 0..4 {
                let (s, e) = (ins[k], ins[(k + 1) % 4]);
                if s && !e {
                    in_out[a] = k;
                    a += 1;
                } else if !s && e {
                    out_in[b] = k;
                    b += 1;
                }
            }
            if a == 1 {
                segs.push((edges[in_out[0]], edges[out_in[0]]));
            } else {
                let center_inside = inside(0.25 * (v[0] + v[1] + v[2] + v[3]));
                for &k in &in_out {
                    // next (center inside) or previous (center outside)
                    // out->in edge in counterclockwise order
                    let target = if center_inside { (k + 1) % 4 } else { (k + 3) % 4 };
                    debug_assert!(out_in.contains(&target));
                    segs.push((edges[k], edges[target]));
                }
            }
        }
    }
    segs
}

/// Edge ids: horizontal edge from node (i,j) to (i+1,j) is even, vertical
/// edge from (i,j) to (i,j+1) is odd.
fn edge_id(nx: usize, i: usize, j: usize, vertical: bool) -> usize {
    2 * (j * (nx + 1) + i) + vertical as usize
}

pub(crate) fn edge_point(ls: &LevelSet, e: usize) -> Point {
    let g = &ls.grid;
    let node = e / 2;
    let (i, j) = (node % (g.nx + 1), node / (g.nx + 1));
    let (i2, j2) = if e % 2 == 0 { (i + 1, j) } else { (i, j + 1) };
    let a = ls.phi[g.idx(i, j)];
    let b = ls.phi[g.idx(i2, j2)];
    let t = if a == b { 0.5 } else { (a / (a - b)).clamp(0.0, 1.0) };
    let p = g.node(i, j);
    let q = g.node(i2, j2);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Raw interface segments as point pairs (interior on the left).
pub(crate) fn interface_segments(ls: &LevelSet) -> Vec<(Point, Point)> {
    cell_segments(ls)
        .into_iter()
        .map(|(a, b)| (edge_point(ls, a), edge_point(ls, b)))
        .collect()
}

/// Marching-squares polylines of `{phi = 0}`.
///
/// Vertices lie on grid edges (linear interpolation of `phi`). Polylines that
/// reach the box boundary are returned open and flagged via
/// [`LoopInfo::closed`].
pub fn extract_boundary(ls: &LevelSet) -> Result<BoundaryTrace> {
    let segs = cell_segments(ls);
    if segs.is_empty() {
        return Err(Error::NoInterface);
    }
    let by_start: HashMap<usize, usize> =
        segs.iter().enumerate().map(|(k, &(s, _))| (s, k)).collect();
    let ends: std::collections::HashSet<usize> = segs.iter().map(|&(_, e)| e).collect();
    let mut used = vec![false; segs.len()];
    let mut chains: Vec<(Vec<usize>, bool)> = Vec::new();

    let follow = |first: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut edges = vec![segs[first].0];
        let mut k = first;
        loop {
            used[k] = true;
            let next_edge = segs[k].1;
            if next_edge == edges[0] {
                return (edges, true);
            }
            edges.push(next_edge);
            match by_start.get(&next_edge) {
                Some(&n) if !used[n] => k = n,
                _ => return (edges, false),
            }
        }
    };
    // open chains begin on a crossing edge that no segment ends at
    for k in 0..segs.len() {
        if !used[k] && !ends.contains(&segs[k].0) {
            chains.push(follow(k, &mut used));
        }
    }
    for k in 0..segs.len() {
        if !used[k] {
            chains.push(follow(k, &mut used));
        }
    }

    let h = ls.grid.h();
    let mut trace = BoundaryTrace {
        points: Vec::new(),
        normals: Vec::new(),
        weights: Vec::new(),
        loop_id: Vec::new(),
        loops: Vec::new(),
    };
    for (edges, closed) in chains {
        let mut pts: Vec<Point> = Vec::with_capacity(edges.len());
        for &e in &edges {
            let p = edge_point(ls, e);
            if pts.last().map_or(true, |&q| dist(p, q) > 1e-10 * h) {
                pts.push(p);
            }
        }
        if closed && pts.len() > 1 && dist(pts[0], *pts.last().unwrap()) <= 1e-10 * h {
            pts.pop();
        }
        if pts.len() < 2 || (closed && pts.len() < 3) {
            continue;
        }
        let id = trace.loops.len();
        let start = trace.points.len();
        let n = pts.len();
        for k in 0..n {
            let prev = if k > 0 {
                Some(pts[k - 1])
            } else if closed {
                Some(pts[n - 1])
            } else {
                None
            };
            let next = if k + 1 < n {
                Some(pts[k + 1])
            } else if closed {
                Some(pts[0])
            } else {
                None
            };
            let w = 0.5 * (prev.map_or(0.0, |q| dist(q, pts[k])) + next.map_or(0.0, |q| dist(q, pts[k])));
            let chord = {
                let a = prev.unwrap_or(pts[k]);
                let b = next.unwrap_or(pts[k]);
                // interior on the left: outward normal is the right-hand side
                [b[1] - a[1], a[0] - b[0]]
            };
            let mut nrm = ls.grid.gradient_at(&ls.phi, pts[k]).unwrap_or(chord);
            if norm(nrm) < 1e-12 {
                nrm = chord;
            }
            let l = norm(nrm);
            trace.points.push(pts[k]);
            trace.normals.push([nrm[0] / l, nrm[1] / l]);
            trace.weights.push(w);
            trace.loop_id.push(id);
        }
        trace.loops.push(LoopInfo { start, len: n, closed });
    }
    if trace.is_empty() || trace.perimeter() <= 0.0 {
        return Err(Error::NoInterface);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{signed_distance, Grid, Shape};
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_single_loop() {
        let g = Grid::centered(1.5, 256).unwrap();
        let ls = signed_distance(&Shape::disk([0.0, 0.0], 1.0), g).unwrap();
        let t = extract_boundary(&ls).unwrap();
        assert_eq!(t.n_loops(), 1);
        assert!(!t.has_open());
        assert!((t.perimeter() - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        // counterclockwise with interior on the left
        assert!(t.enclosed_area() > 0.0);
        for (p, n) in t.points.iter().zip(&t.normals) {
            assert!((norm(*n) - 1.0).abs() < 1e-12);
            assert!(p[0] * n[0] + p[1] * n[1] > 0.99 * norm(*p));
        }
        let wsum: f64 = t.weights.iter().sum();
        assert!(t.weights.iter().all(|&w| w > 0.0));
        assert!((wsum - t.perimeter()).abs() < 1e-12);
    }

    #[test]
    fn two_disjoint_disks_two_loops() {
        let g = Grid::centered(3.0, 128).unwrap();
        let s = Shape::Union(vec![Shape::disk([-1.2, 0.0], 0.8), Shape::disk([1.2, 0.0], 0.8)]);
        let ls = signed_distance(&s, g).unwrap();
        let t = extract_boundary(&ls).unwrap();
        assert_eq!(t.n_loops(), 2);
        for k in 0..2 {
            let pts = t.loop_points(k);
            let n = pts.len();
            let a: f64 = 0.5 * (0..n).map(|i| crate::grid::cross(pts[i], pts[(i + 1) % n])).sum::<f64>();
            assert!(a > 0.0, "loop {k} not counterclockwise");
        }
    }

    #[test]
    fn hole_is_clockwise() {
        // annulus: inside the big disk and outside the small one
        let g = Grid::centered(2.0, 128).unwrap();
        let ls = LevelSet::from_fn(g, |p| {
            let r = norm(p);
            (r - 1.5).max(0.5 - r)
        });
        let t = extract_boundary(&ls).unwrap();
        assert_eq!(t.n_loops(), 2);
        let areas: Vec<f64> = (0..2)
            .map(|k| {
                let p = t.loop_points(k);
                let n = p.len();
                0.5 * (0..n).map(|i| crate::grid::cross(p[i], p[(i + 1) % n])).sum::<f64>()
            })
            .collect();
        assert!(areas.iter().any(|&a| a > 0.0) && areas.iter().any(|&a| a < 0.0));
        assert!((t.enclosed_area() - PI * (1.5f64.powi(2) - 0.25)).abs() < 0.01);
    }

    #[test]
    fn half_plane_gives_open_polyline() {
        let g = Grid::centered(1.0, 32).unwrap();
        let ls = LevelSet::from_fn(g, |p| p[0] - 0.1);
        let t = extract_boundary(&ls).unwrap();
        assert_eq!(t.n_loops(), 1);
        assert!(t.has_open());
        assert!((t.perimeter() - 2.0).abs() < 1e-12);
        for n in &t.normals {
            assert!((n[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_crossing_is_an_error() {
        let g = Grid::centered(1.0, 16).unwrap();
        let ls = LevelSet::from_fn(g, |_| 1.0);
        assert!(matches!(extract_boundary(&ls), Err(Error::NoInterface)));
    }

    #[test]
    fn saddle_cells_stay_consistent() {
        // checkerboard-like field creates saddles; every loop must close
        let g = Grid::centered(1.0, 16).unwrap();
        let ls = LevelSet::from_fn(g, |p| (7.0 * p[0]).sin() * (7.0 * p[1]).sin() + 0.05);
        let t = extract_boundary(&ls).unwrap();
        for l in &t.loops {
            if l.closed {
                assert!(l.len >= 3);
            }
        }
        assert!(t.perimeter() > 0.0);
    }
}
