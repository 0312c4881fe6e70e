//! Piecewise tensor-product Lagrange interpolation of node values.
//!
//! Each cell uses the `M x M` node stencil centred on it (shifted inwards at
//! the box edge), so the interpolant is continuous across cells and exact for
//! tensor polynomials of degree `M - 1`.

use std::sync::OnceLock;

use super::{Grid, Point};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet {
    pub value: f64,
    pub grad: Point,
    /// `[fxx, fxy, fyy]`
    pub hess: [f64; 3],
}

/// Monomial coefficients of the Lagrange basis polynomials on the integer
/// nodes `1 - M/2 .. M/2`; row `k` holds `L_k(t) = sum_p c[k][p] t^p`.
fn coefficients<const M: usize>() -> [[f64; M]; M] {
    let off = (M / 2) as f64 - 1.0;
    let x: [f64; M] = std::array::from_fn(|k| k as f64 - off);
    let mut out = [[0.0; M]; M];
    for k in 0..M {
        let mut poly = vec![1.0];
        let mut den = 1.0;
        for m in (0..M).filter(|&m| m != k) {
            // multiply by (t - x_m)
            let mut next = vec![0.0; poly.len() + 1];
            for (p, &c) in poly.iter().enumerate() {
                next[p + 1] += c;
                next[p] -= c * x[m];
            }
            poly = next;
            den *= x[k] - x[m];
        }
        for p in 0..M {
            out[k][p] = poly[p] / den;
        }
    }
    out
}

/// Basis values with first and second derivatives at local coordinate `t`.
fn basis<const M: usize>(coef: &[[f64; M]; M], t: f64) -> ([f64; M], [f64; M], [f64; M]) {
    let mut l = [0.0; M];
    let mut dl = [0.0; M];
    let mut ddl = [0.0; M];
    for k in 0..M {
        let c = &coef[k];
        let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
        for p in (0..M).rev() {
            dd = dd * t + 2.0 * d;
            d = d * t + v;
            v = v * t + c[p];
        }
        l[k] = v;
        dl[k] = d;
        ddl[k] = dd;
    }
    (l, dl, ddl)
}

fn jet<const M: usize>(coef: &[[f64; M]; M], grid: &Grid, values: &[f64], p: Point) -> Option<Jet> {
    let (i, j, tx, ty) = grid.locate(p)?;
    let back = (M / 2 - 1) as isize;
    let si = (i as isize - back).clamp(0, (grid.nx + 1 - M) as isize) as usize;
    let sj = (j as isize - back).clamp(0, (grid.ny + 1 - M) as isize) as usize;
    let tx = tx + (i - si) as f64 - back as f64;
    let ty = ty + (j - sj) as f64 - back as f64;
    let (lx, dlx, ddlx) = basis(coef, tx);
    let (ly, dly, ddly) = basis(coef, ty);
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut v = 0.0;
    let (mut gx, mut gy) = (0.0, 0.0);
    let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
    for b in 0..M {
        let row = grid.idx(si, sj + b);
        // contract along x first
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for a in 0..M {
            let f = values[row + a];
            r0 += f * lx[a];
            r1 += f * dlx[a];
            r2 += f * ddlx[a];
        }
        v += r0 * ly[b];
        gx += r1 * ly[b];
        gy += r0 * dly[b];
        hxx += r2 * ly[b];
        hxy += r1 * dly[b];
        hyy += r0 * ddly[b];
    }
    Some(Jet {
        value: v,
        grad: [gx / hx, gy / hy],
        hess: [hxx / (hx * hx), hxy / (hx * hy), hyy / (hy * hy)],
    })
}

#[allow(dead_code)]
pub(crate) fn cubic_jet(grid: &Grid, values: &[f64], p: Point) -> Option<Jet> {
    static COEF: OnceLock<[[f64; 4]; 4]> = OnceLock::new();
    jet(COEF.get_or_init(coefficients::<4>), grid, values, p)
}

pub(crate) fn quintic_jet(grid: &Grid, values: &[f64], p: Point) -> Option<Jet> {
    static COEF: OnceLock<[[f64; 6]; 6]> = OnceLock::new();
    jet(COEF.get_or_init(coefficients::<6>), grid, values, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;

    fn check(j: Jet, f: [f64; 6]) {
        assert!((j.value - f[0]).abs() < 1e-12, "{} vs {}", j.value, f[0]);
        assert!((j.grad[0] - f[1]).abs() < 1e-10);
        assert!((j.grad[1] - f[2]).abs() < 1e-10);
        assert!((j.hess[0] - f[3]).abs() < 1e-8);
        assert!((j.hess[1] - f[4]).abs() < 1e-8);
        assert!((j.hess[2] - f[5]).abs() < 1e-8);
    }

    #[test]
    fn exact_for_bicubic_polynomials() {
        let g = Grid::centered(1.0, 16).unwrap();
        let f = |p: Point| p[0].powi(3) - 2.0 * p[0] * p[1] * p[1] + p[1].powi(2) * p[0].powi(3) + 0.5;
        let fld = ScalarField::from_fn(g, f);
        for p in [[0.13, -0.41], [-0.93, 0.97], [0.5, 0.5]] {
            let (x, y) = (p[0], p[1]);
            let exact = [
                f(p),
                3.0 * x * x - 2.0 * y * y + 3.0 * y * y * x * x,
                -4.0 * x * y + 2.0 * y * x.powi(3),
                6.0 * x + 6.0 * y * y * x,
                -4.0 * y + 6.0 * y * x * x,
                -4.0 * x + 2.0 * x.powi(3),
            ];
            check(cubic_jet(&g, &fld.values, p).unwrap(), exact);
            check(quintic_jet(&g, &fld.values, p).unwrap(), exact);
        }
    }

    #[test]
    fn quintic_exact_for_degree_five() {
        let g = Grid::centered(1.0, 16).unwrap();
        let f = |p: Point| p[0].powi(5) * p[1] - p[1].powi(5) + p[0].powi(4) * p[1].powi(4);
        let fld = ScalarField::from_fn(g, f);
        for p in [[0.013, -0.71], [-0.99, 0.97], [0.31, 0.5]] {
            let (x, y) = (p[0], p[1]);
            let exact = [
                f(p),
                5.0 * x.powi(4) * y + 4.0 * x.powi(3) * y.powi(4),
                x.powi(5) - 5.0 * y.powi(4) + 4.0 * x.powi(4) * y.powi(3),
                20.0 * x.powi(3) * y + 12.0 * x * x * y.powi(4),
                5.0 * x.powi(4) + 16.0 * x.powi(3) * y.powi(3),
                -20.0 * y.powi(3) + 12.0 * x.powi(4) * y * y,
            ];
            check(quintic_jet(&g, &fld.values, p).unwrap(), exact);
        }
    }
}
