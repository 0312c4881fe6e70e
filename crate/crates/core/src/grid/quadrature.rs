//! Boundary and cut-cell volume quadrature.

use super::{extract_boundary, BoundaryTrace, LevelSet, Point, ScalarField};
use crate::Result;

/// Something to integrate: a constant, a node field, or a closed-form
/// function of position.
#[derive(Clone, Copy)]
pub enum Integrand<'a> {
    Const(f64),
    Field(&'a ScalarField),
    Fn(&'a dyn Fn(Point) -> f64),
}

impl Integrand<'_> {
    /// Value at an arbitrary point; node fields are interpolated bilinearly.
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            Integrand::Const(c) => *c,
            Integrand::Field(f) => f.sample(p).unwrap_or(0.0),
            Integrand::Fn(f) => f(p),
        }
    }
}

/// Arclength quadrature over every polyline of `{phi = 0}`.
pub fn boundary_integral(ls: &LevelSet, h: Integrand<'_>) -> Result<f64> {
    let trace = extract_boundary(ls)?;
    Ok(trace_integral(&trace, h))
}

pub fn trace_integral(trace: &BoundaryTrace, h: Integrand<'_>) -> f64 {
    trace.integrate_fn(|p| h.eval(p))
}

/// Integral over `{phi < 0}`.
///
/// Cells with all corners inside use the cell rule (corner average for
/// node fields, 2x2 Gauss for closures). Cut cells are split into four
/// triangles around the cell centre, with `phi` and node fields taken
/// linear on each triangle, and the negative part of each triangle is
/// integrated exactly for linear data.
pub fn volume_integral(ls: &LevelSet, h: Integrand<'_>) -> f64 {
    let g = &ls.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let area = hx * hy;
    let gauss = 0.5 / 3f64.sqrt();
    let mut total = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = [g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)];
            let phi = c.map(|k| ls.phi[k]);
            let n_in = phi.iter().filter(|&&v| v < 0.0).count();
            if n_in == 0 {
                continue;
            }
            let [x0, y0] = g.node(i, j);
            if n_in == 4 {
                total += match h {
                    Integrand::Const(v) => v * area,
                    Integrand::Field(f) => 0.25 * area * c.iter().map(|&k| f.values[k]).sum::<f64>(),
                    Integrand::Fn(f) => {
                        let mut s = 0.0;
                        for gy in [0.5 - gauss, 0.5 + gauss] {
                            for gx in [0.5 - gauss, 0.5 + gauss] {
                                s += f([x0 + gx * hx, y0 + gy * hy]);
                            }
                        }
                        0.25 * area * s
                    }
                };
                continue;
            }
            let corners: [Point; 4] = [[x0, y0], [x0 + hx, y0], [x0 + hx, y0 + hy], [x0, y0 + hy]];
            let fv: [f64; 4] = match h {
                Integrand::Field(f) => c.map(|k| f.values[k]),
                _ => [0.0; 4],
            };
            let center = Vertex {
                p: [x0 + 0.5 * hx, y0 + 0.5 * hy],
                phi: 0.25 * phi.iter().sum::<f64>(),
                f: 0.25 * fv.iter().sum::<f64>(),
            };
            for k in 0..4 {
                let a = Vertex { p: corners[k], phi: phi[k], f: fv[k] };
                let b = Vertex { p: corners[(k + 1) % 4], phi: phi[(k + 1) % 4], f: fv[(k + 1) % 4] };
                total += clipped_triangle_integral([a, b, center], h);
            }
        }
    }
    total
}

#[derive(Clone, Copy)]
struct Vertex {
    p: Point,
    phi: f64,
    f: f64,
}

fn lerp(a: Vertex, b: Vertex) -> Vertex {
    let t = a.phi / (a.phi - b.phi);
    Vertex {
        p: [a.p[0] + t * (b.p[0] - a.p[0]), a.p[1] + t * (b.p[1] - a.p[1])],
        phi: 0.0,
        f: a.f + t * (b.f - a.f),
    }
}

fn clipped_triangle_integral(tri: [Vertex; 3], h: Integrand<'_>) -> f64 {
    // Sutherland-Hodgman against phi < 0
    let mut poly: Vec<Vertex> = Vec::with_capacity(4);
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let (ain, bin) = (a.phi < 0.0, b.phi < 0.0);
        if ain {
            poly.push(a);
        }
        if ain != bin {
            poly.push(lerp(a, b));
        }
    }
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 1..poly.len() - 1 {
        let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
        let area = 0.5
            * ((b.p[0] - a.p[0]) * (c.p[1] - a.p[1]) - (c.p[0] - a.p[0]) * (b.p[1] - a.p[1])).abs();
        s += area
            * match h {
                Integrand::Const(v) => v,
                Integrand::Field(_) => (a.f + b.f + c.f) / 3.0,
                Integrand::Fn(f) => {
                    let mid = |u: Point, v: Point| [(u[0] + v[0]) * 0.5, (u[1] + v[1]) * 0.5];
                    (f(mid(a.p, b.p)) + f(mid(b.p, c.p)) + f(mid(c.p, a.p))) / 3.0
                }
            };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{signed_distance, Grid, Shape};
    use std::f64::consts::PI;

    fn disk(r: f64, n: usize) -> LevelSet {
        let g = Grid::centered(r + 1.0, n).unwrap();
        signed_distance(&Shape::disk([0.0, 0.0], r), g).unwrap()
    }

    #[test]
    fn boundary_examples() {
        let ls = disk(1.0, 128);
        let h = ls.grid.h();
        let l = boundary_integral(&ls, Integrand::Const(1.0)).unwrap();
        assert!((l - 2.0 * PI).abs() < 2.0 * h * 2.0);
        let q = |p: Point| p[0] * p[0] + p[1] * p[1];
        let l2 = boundary_integral(&ls, Integrand::Fn(&q)).unwrap();
        assert!((l2 - 2.0 * PI).abs() < 2.0 * h * 2.0);
        let ls2 = disk(2.0, 128);
        let l3 = boundary_integral(&ls2, Integrand::Const(0.25)).unwrap();
        assert!((l3 - PI).abs() < 0.25 * 2.0 * ls2.grid.h() * 3.0);
    }

    #[test]
    fn volume_examples() {
        let ls = disk(1.0, 128);
        let h = ls.grid.h();
        assert!((volume_integral(&ls, Integrand::Const(1.0)) - PI).abs() < 4.0 * h);
        let ls2 = disk(0.5, 128);
        assert!((volume_integral(&ls2, Integrand::Const(4.0)) - PI).abs() < 4.0 * 4.0 * ls2.grid.h() * 0.5);
        let w = |p: Point| (1.0 - p[0] * p[0] - p[1] * p[1]) / 4.0;
        let v = volume_integral(&ls, Integrand::Fn(&w));
        assert!((v - PI / 8.0).abs() < 1e-3, "{v}");
        let fld = ScalarField::from_fn(ls.grid, w);
        let v2 = volume_integral(&ls, Integrand::Field(&fld));
        assert!((v2 - PI / 8.0).abs() < 1e-3, "{v2}");
    }

    #[test]
    fn half_plane_area_is_exact() {
        let g = Grid::centered(1.0, 32).unwrap();
        let ls = LevelSet::from_fn(g, |p| p[0] + 0.5 * p[1] - 0.123);
        // region x < 0.123 - y/2 inside [-1,1]^2
        let exact = 2.0 * (0.123 + 1.0);
        assert!((volume_integral(&ls, Integrand::Const(1.0)) - exact).abs() < 1e-12);
    }
}
