//! Embedded-Dirichlet Poisson solves on `{phi < 0}`, cascades, boundary
//! gradients and the first Dirichlet eigenvalue.

use serde::{Deserialize, Serialize};

use crate::grid::{extract_boundary, BoundaryTrace, Grid, LevelSet, Point, ScalarField, SourceSpec};
use crate::{Error, Result};

/// Smallest admissible interface fraction on a cut edge.
const THETA_MIN: f64 = 1e-6;
const NONE: usize = usize::MAX;

/// Right-hand side of `-Δu = f`.
#[derive(Clone, Copy)]
pub enum Rhs<'a> {
    Source(&'a SourceSpec),
    Field(&'a ScalarField),
    Const(f64),
}

impl Rhs<'_> {
    /// Node samples of `f`; source pieces are sampled by exact membership.
    pub fn sample(&self, grid: Grid) -> Result<Vec<f64>> {
        let v = match self {
            Rhs::Source(s) => ScalarField::from_fn(grid, |p| s.value_at(p)).values,
            Rhs::Field(f) => {
                if f.grid != grid {
                    return Err(Error::InvalidParameter("right-hand side on a different grid".into()));
                }
                f.values.clone()
            }
            Rhs::Const(c) => vec![*c; grid.len()],
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSource("non-finite right-hand side".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonOptions {
    pub tol: f64,
    /// Defaults to `20 (nx + ny)` when absent.
    pub max_iters: Option<usize>,
    /// Second-order (Shortley-Weller) treatment of cut edges. The matrix is
    /// then nonsymmetric and is solved by BiCGSTAB.
    pub quadratic: bool,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: None, quadratic: false }
    }
}

/// Discrete Dirichlet Laplacian `-Δ` on the interior nodes of a level set.
///
/// Unknowns are nodes with `phi < 0` off the box boundary. A neighbour
/// outside the domain contributes through the interface fraction
/// `theta = phi_i / (phi_i - phi_nb)`.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    pub grid: Grid,
    /// Grid node of each unknown.
    pub nodes: Vec<usize>,
    /// Unknown index of each grid node (`usize::MAX` if not an unknown).
    pub unknown: Vec<usize>,
    diag: Vec<f64>,
    nbr: Vec<[(usize, f64); 4]>,
    pub symmetric: bool,
}

impl DirichletOperator {
    pub fn new(ls: &LevelSet, quadratic: bool) -> Result<Self> {
        let g = ls.grid;
        let mut unknown = vec![NONE; g.len()];
        let mut nodes = Vec::new();
        for (i, j) in g.node_iter() {
            let k = g.idx(i, j);
            if !g.is_box_node(i, j) && ls.phi[k] < 0.0 {
                unknown[k] = nodes.len();
                nodes.push(k);
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyOrFull);
        }
        let (hx, hy) = (g.hx(), g.hy());
        let stride = g.nodes_x();
        let mut diag = vec![0.0; nodes.len()];
        let mut nbr = vec![[(NONE, 0.0); 4]; nodes.len()];
        for (r, &k) in nodes.iter().enumerate() {
            // axis 0: x (west, east), axis 1: y (south, north)
            for (axis, h, step) in [(0, hx, 1usize), (1, hy, stride)] {
                let sides = [k - step, k + step];
                let mut dist = [h; 2];
                for (s, &nb) in sides.iter().enumerate() {
                    if ls.phi[nb] >= 0.0 {
                        let theta = ls.phi[k] / (ls.phi[k] - ls.phi[nb]);
                        dist[s] = theta.max(THETA_MIN) * h;
                    }
                }
                for (s, &nb) in sides.iter().enumerate() {
                    let interior = unknown[nb] != NONE;
                    let slot = 2 * axis + s;
                    if quadratic {
                        let (hs, ho) = (dist[s], dist[1 - s]);
                        diag[r] += 2.0 / (hs * (hs + ho));
                        if interior {
                            nbr[r][slot] = (unknown[nb], -2.0 / (hs * (hs + ho)));
                        }
                    } else {
                        diag[r] += 1.0 / (h * dist[s]);
                        if interior {
                            nbr[r][slot] = (unknown[nb], -1.0 / (h * h));
                        }
                    }
                }
            }
        }
        Ok(Self { grid: g, nodes, unknown, diag, nbr, symmetric: !quadratic })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.len() {
            let mut s = self.diag[r] * x[r];
            for &(c, a) in &self.nbr[r] {
                if c != NONE {
                    s += a * x[c];
                }
            }
            y[r] = s;
        }
    }

    /// Restrict a node vector to the unknowns.
    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&k| values[k]).collect()
    }

    /// Expand unknowns to a node vector with zeros elsewhere.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (&k, &v) in self.nodes.iter().zip(x) {
            out[k] = v;
        }
        out
    }

    /// Solve `A x = b` from the initial guess `x`; returns iterations and
    /// final relative residual.
    pub fn solve(&self, b: &[f64], x: &mut [f64], tol: f64, max_iters: usize) -> Result<(usize, f64)> {
        if self.symmetric {
            pcg(self, b, x, tol, max_iters)
        } else {
            bicgstab(self, b, x, tol, max_iters)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pcg(op: &DirichletOperator, b: &[f64], x: &mut [f64], tol: f64, max_iters: usize) -> Result<(usize, f64)> {
    let n = op.len();
    let bn = dot(b, b).sqrt();
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((0, 0.0));
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let mut z: Vec<f64> = r.iter().zip(&op.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / bn;
    for it in 0..max_iters {
        if res <= tol {
            return Ok((it, res));
        }
        op.apply(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        for k in 0..n {
            z[k] = r[k] / op.diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        res = dot(&r, &r).sqrt() / bn;
    }
    if res <= tol {
        return Ok((max_iters, res));
    }
    Err(Error::SolverFailure { iterations: max_iters, residual: res })
}

/// Jacobi-preconditioned BiCGSTAB.
fn bicgstab(
    op: &DirichletOperator,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<(usize, f64)> {
    let n = op.len();
    let bn = dot(b, b).sqrt();
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((0, 0.0));
    }
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&op.diag).map(|(v, d)| v / d).collect() };
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / bn;
    for it in 0..max_iters {
        if res <= tol {
            return Ok((it, res));
        }
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let ph = precond(&p);
        op.apply(&ph, &mut v);
        alpha = rho / dot(&r0, &v);
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        let sh = precond(&s);
        op.apply(&sh, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * ph[k] + omega * sh[k];
            r[k] = s[k] - omega * t[k];
        }
        res = dot(&r, &r).sqrt() / bn;
    }
    if res <= tol {
        return Ok((max_iters, res));
    }
    Err(Error::SolverFailure { iterations: max_iters, residual: res })
}

fn default_max_iters(g: &Grid) -> usize {
    20 * (g.nx + g.ny)
}

/// Discrete solution of `-Δu = f` in `{phi < 0}`, `u = 0` on the interface.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: ScalarField,
    pub ls: LevelSet,
    /// Node samples of the right-hand side that was used.
    pub f: ScalarField,
    pub iterations: usize,
    pub linear_residual: f64,
    /// Discrete energy `sum_i u_i (A u)_i dx dy`, which approximates
    /// `∫ |∇u|^2`.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub linear_residual: f64,
    pub flagged_vertices: usize,
}

pub fn solve_poisson(ls: &LevelSet, f: Rhs<'_>) -> Result<PoissonSolution> {
    solve_poisson_with(ls, f, &PoissonOptions::default(), None)
}

/// Poisson solve with explicit options and an optional warm start.
pub fn solve_poisson_with(
    ls: &LevelSet,
    f: Rhs<'_>,
    opts: &PoissonOptions,
    warm: Option<&ScalarField>,
) -> Result<PoissonSolution> {
    let grid = ls.grid;
    let fv = f.sample(grid)?;
    let op = DirichletOperator::new(ls, opts.quadratic)?;
    let b = op.gather(&fv);
    let mut x = match warm {
        Some(w) if w.grid == grid => op.gather(&w.values),
        _ => vec![0.0; op.len()],
    };
    let max_iters = opts.max_iters.unwrap_or_else(|| default_max_iters(&grid));
    let (iterations, linear_residual) = op.solve(&b, &mut x, opts.tol, max_iters)?;
    let mut ax = vec![0.0; op.len()];
    op.apply(&x, &mut ax);
    let energy = dot(&x, &ax) * grid.cell_area();
    Ok(PoissonSolution {
        u: ScalarField { grid, values: op.scatter(&x) },
        ls: ls.clone(),
        f: ScalarField { grid, values: fv },
        iterations,
        linear_residual,
        energy,
    })
}

/// `u_0` solves `P(Ω, f)` and `u_k` solves `P(Ω, u_{k-1})`.
pub fn solve_cascade(ls: &LevelSet, f: Rhs<'_>, depth: usize) -> Result<Vec<PoissonSolution>> {
    solve_cascade_with(ls, f, depth, &PoissonOptions::default())
}

pub fn solve_cascade_with(
    ls: &LevelSet,
    f: Rhs<'_>,
    depth: usize,
    opts: &PoissonOptions,
) -> Result<Vec<PoissonSolution>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("cascade depth must be at least 1".into()));
    }
    let mut out: Vec<PoissonSolution> = Vec::with_capacity(depth);
    out.push(solve_poisson_with(ls, f, opts, None)?);
    for _ in 1..depth {
        let prev = out.last().expect("nonempty").u.clone();
        out.push(solve_poisson_with(ls, Rhs::Field(&prev), opts, None)?);
    }
    Ok(out)
}

/// `|∇u|` on the interface polylines.
#[derive(Debug, Clone)]
pub struct BoundaryGradient {
    pub trace: BoundaryTrace,
    /// `|∇u|` per vertex (zero at flagged vertices).
    pub values: Vec<f64>,
    /// Vertices whose inward samples left the domain (thin slivers).
    pub flagged: Vec<bool>,
}

impl BoundaryGradient {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&b| b).count()
    }

    pub fn usable(&self) -> Vec<bool> {
        self.flagged.iter().map(|&b| !b).collect()
    }

    /// Arclength integral over unflagged vertices.
    pub fn integral(&self) -> f64 {
        self.trace.integrate_masked(&self.values, &self.usable())
    }

    pub fn integral_of(&self, f: impl Fn(f64, Point) -> f64) -> f64 {
        let vals: Vec<f64> =
            self.values.iter().zip(&self.trace.points).map(|(&v, &p)| f(v, p)).collect();
        self.trace.integrate_masked(&vals, &self.usable())
    }

    pub fn mean(&self) -> f64 {
        let usable = self.usable();
        let w: f64 = self.trace.weights.iter().zip(&usable).filter(|(_, &u)| u).map(|(w, _)| w).sum();
        if w > 0.0 {
            self.integral() / w
        } else {
            0.0
        }
    }
}

pub fn boundary_gradient(sol: &PoissonSolution) -> Result<BoundaryGradient> {
    let trace = extract_boundary(&sol.ls)?;
    Ok(boundary_gradient_on(sol, trace))
}

/// `|∇u|` at each vertex of `trace` from the one-sided second-order
/// difference `(4 u(h) - u(2h)) / (2h)` along the inward normal, using the
/// interface value `u = 0`.
pub fn boundary_gradient_on(sol: &PoissonSolution, trace: BoundaryTrace) -> BoundaryGradient {
    let grid = sol.u.grid;
    let h = grid.h();
    let ext = extended_solution(sol);
    let mut values = Vec::with_capacity(trace.len());
    let mut flagged = Vec::with_capacity(trace.len());
    for (p, n) in trace.points.iter().zip(&trace.normals) {
        let s1 = [p[0] - h * n[0], p[1] - h * n[1]];
        let s2 = [p[0] - 2.0 * h * n[0], p[1] - 2.0 * h * n[1]];
        let inside = |q: Point| sol.ls.sample(q).is_some_and(|v| v < 0.0);
        match (grid.bilinear(&ext, s1), grid.bilinear(&ext, s2)) {
            (Some(u1), Some(u2)) if inside(s1) && inside(s2) => {
                values.push(((4.0 * u1 - u2) / (2.0 * h)).abs());
                flagged.push(false);
            }
            _ => {
                values.push(0.0);
                flagged.push(true);
            }
        }
    }
    BoundaryGradient { trace, values, flagged }
}

/// `u` with values at outside nodes near the interface replaced by a
/// quadratic extrapolation along the normal, so bilinear samples close to
/// the interface are not polluted by the zero padding.
fn extended_solution(sol: &PoissonSolution) -> Vec<f64> {
    let grid = sol.u.grid;
    let h = grid.h();
    let ls = &sol.ls;
    let mut ext = sol.u.values.clone();
    for (i, j) in grid.node_iter() {
        let k = grid.idx(i, j);
        let phi = ls.phi[k];
        if phi < 0.0 || phi >= 1.5 * h {
            continue;
        }
        let gr = grid.node_gradient(&ls.phi, i, j);
        let gn = gr[0].hypot(gr[1]);
        if gn < 1e-12 {
            continue;
        }
        let n = [gr[0] / gn, gr[1] / gn];
        let x = grid.node(i, j);
        let d = phi / gn;
        let foot = [x[0] - d * n[0], x[1] - d * n[1]];
        let at = |s: f64| -> Option<f64> {
            let q = [foot[0] - s * n[0], foot[1] - s * n[1]];
            if ls.sample(q)? < 0.0 {
                grid.bilinear(&sol.u.values, q)
            } else {
                None
            }
        };
        // u(s) = G s + A s^2 / 2 through u(2h), u(3h)
        if let (Some(u2), Some(u3)) = (at(2.0 * h), at(3.0 * h)) {
            let a = (u3 / 3.0 - u2 / 2.0) * 2.0 / (h * h);
            let gcoef = u2 / (2.0 * h) - a * h;
            let s = -d;
            ext[k] = gcoef * s + 0.5 * a * s * s;
        }
    }
    ext
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of the discrete Dirichlet Laplacian by inverse power
/// iteration.
pub fn first_eigenvalue(ls: &LevelSet) -> Result<EigenResult> {
    first_eigenpair(ls).map(|(e, _)| e)
}

/// Eigenvalue and the corresponding eigenvector (unit max norm, positive).
pub fn first_eigenpair(ls: &LevelSet) -> Result<(EigenResult, ScalarField)> {
    const TOL: f64 = 1e-8;
    const MAX_ITERS: usize = 200;
    let op = DirichletOperator::new(ls, false)?;
    let n = op.len();
    let max_cg = default_max_iters(&ls.grid);
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut ay = vec![0.0; n];
    let mut lambda = f64::NAN;
    for it in 1..=MAX_ITERS {
        let xn = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= xn);
        // warm start from the previous direction scaled by 1/lambda
        let scale = if lambda.is_finite() { 1.0 / lambda } else { 0.0 };
        y.iter_mut().zip(&x).for_each(|(y, x)| *y = x * scale);
        op.solve(&x, &mut y, 1e-12, max_cg)?;
        op.apply(&y, &mut ay);
        let rq = dot(&y, &ay) / dot(&y, &y);
        if (rq - lambda).abs() <= TOL * rq.abs() {
            let m = y.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            let v: Vec<f64> = y.iter().map(|v| v / m).collect();
            let field = ScalarField { grid: ls.grid, values: op.scatter(&v) };
            return Ok((EigenResult { lambda: rq, iterations: it }, field));
        }
        lambda = rq;
        std::mem::swap(&mut x, &mut y);
    }
    Err(Error::EigenStagnation { iterations: MAX_ITERS, rayleigh: lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{signed_distance, Shape};

    fn disk(r: f64, half: f64, n: usize) -> LevelSet {
        signed_distance(&Shape::disk([0.0, 0.0], r), Grid::centered(half, n).unwrap()).unwrap()
    }

    #[test]
    fn unit_disk_center_value() {
        let ls = disk(1.0, 1.25, 64);
        let sol = solve_poisson(&ls, Rhs::Const(1.0)).unwrap();
        let c = sol.u.at(32, 32);
        assert!((c - 0.25).abs() < 2e-3, "{c}");
        assert!(sol.linear_residual <= 1e-10);
    }

    #[test]
    fn zero_source_gives_zero() {
        let ls = disk(1.0, 1.5, 32);
        let sol = solve_poisson(&ls, Rhs::Const(0.0)).unwrap();
        assert!(sol.u.values.iter().all(|&v| v == 0.0));
        let bg = boundary_gradient(&sol).unwrap();
        assert!(bg.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn boundary_gradient_of_unit_disk() {
        let ls = disk(1.0, 1.5, 96);
        let h = ls.grid.h();
        let sol = solve_poisson(&ls, Rhs::Const(1.0)).unwrap();
        let bg = boundary_gradient(&sol).unwrap();
        assert_eq!(bg.flagged_count(), 0);
        for v in &bg.values {
            assert!((v - 0.5).abs() < 3.0 * h, "{v}");
        }
    }

    #[test]
    fn quadratic_option_converges() {
        let ls = disk(1.0, 1.25, 64);
        let opts = PoissonOptions { quadratic: true, ..Default::default() };
        let sol = solve_poisson_with(&ls, Rhs::Const(1.0), &opts, None).unwrap();
        assert!((sol.u.at(32, 32) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn solver_failure_reports_residual() {
        let ls = disk(1.0, 1.25, 64);
        let opts = PoissonOptions { max_iters: Some(3), ..Default::default() };
        match solve_poisson_with(&ls, Rhs::Const(1.0), &opts, None) {
            Err(Error::SolverFailure { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigenvalue_of_unit_disk() {
        let ls = disk(1.0, 1.25, 64);
        let e = first_eigenvalue(&ls).unwrap();
        let j01 = 2.404825557695773f64;
        assert!((e.lambda / (j01 * j01) - 1.0).abs() < 0.02, "{}", e.lambda);
    }
}
