//! Level-set shape-gradient descent for `QS(f, g)` and `B(f, g)` under the
//! containment constraint `Ω ⊇ C_f`.

use serde::{Deserialize, Serialize};

use crate::grid::spatial::SegmentIndex;
use crate::grid::{
    extract_boundary, reinitialize, signed_distance, volume_integral, BoundaryTrace, Grid, Integrand,
    LevelSet, Point, ScalarField, Shape, SourceSpec,
};
use crate::pde::{
    boundary_gradient_on, solve_poisson_with, BoundaryGradient, PoissonOptions, PoissonSolution, Rhs,
};
use crate::{Error, Result};

/// Boundary datum `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum GSpec {
    Constant { k: f64 },
    /// `g(x) = k |x|^alpha`
    RadialPower { k: f64, alpha: f64 },
    /// Bilinear interpolation of node samples.
    Table(ScalarField),
}

impl GSpec {
    pub fn constant(k: f64) -> Self {
        GSpec::Constant { k }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match self {
            GSpec::Constant { k } => *k,
            GSpec::RadialPower { k, alpha } => k * p[0].hypot(p[1]).powf(*alpha),
            GSpec::Table(f) => f.sample(p).unwrap_or(f64::NAN),
        }
    }

    /// Parameter sanity (positivity is checked where `g` is evaluated).
    pub fn validate(&self) -> Result<()> {
        match self {
            GSpec::Constant { k } | GSpec::RadialPower { k, .. } if !(k.is_finite() && *k > 0.0) => {
                Err(Error::InvalidG(format!("k must be positive, got {k}")))
            }
            GSpec::RadialPower { alpha, .. } if !alpha.is_finite() => {
                Err(Error::InvalidG(format!("alpha must be finite, got {alpha}")))
            }
            GSpec::Table(f) if f.values.iter().any(|v| !v.is_finite()) => {
                Err(Error::InvalidG("table contains non-finite values".into()))
            }
            _ => Ok(()),
        }
    }

    /// Values at `points`, rejecting nonpositive or non-finite samples.
    pub fn sample(&self, points: &[Point]) -> Result<Vec<f64>> {
        points
            .iter()
            .map(|&p| {
                let v = self.eval(p);
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::InvalidG(format!("g({:?}) = {v} is not positive", p)))
                }
            })
            .collect()
    }

    /// Same datum multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            GSpec::Constant { k } => GSpec::Constant { k: k * s },
            GSpec::RadialPower { k, alpha } => GSpec::RadialPower { k: k * s, alpha: *alpha },
            GSpec::Table(f) => GSpec::Table(f.map(|v| v * s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescentParams {
    pub cfl: f64,
    pub max_iters: usize,
    pub tol_residual: f64,
    pub reinit_every: usize,
    pub backtrack_max: usize,
    /// Second-order cut-edge treatment in the Poisson solves.
    pub quadratic_ghost: bool,
}

impl Default for DescentParams {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            max_iters: 500,
            tol_residual: 0.05,
            reinit_every: 5,
            backtrack_max: 8,
            quadratic_ghost: false,
        }
    }
}

impl DescentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.tol_residual > 0.0 && self.tol_residual.is_finite()) {
            return Err(Error::InvalidParameter("tol_residual must be positive".into()));
        }
        if self.reinit_every == 0 {
            return Err(Error::InvalidParameter("reinit_every must be at least 1".into()));
        }
        Ok(())
    }

    fn poisson(&self) -> PoissonOptions {
        PoissonOptions { quadratic: self.quadratic_ghost, ..Default::default() }
    }
}

/// Which free-boundary problem is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Qs,
    /// `g_squared` selects the printed `∫ g^2` form of the functional
    /// instead of `∫ g`.
    Bilap { g_squared: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    ConstrainedAtHull,
    MaxIters,
    /// No step length in the line search decreased the functional.
    Stalled,
    /// A solve failed mid-descent; the report is partial.
    Failed,
}

/// Initial domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Shape(Shape),
    /// `C_f` dilated by `margin_cells * h`.
    HullMargin { margin_cells: f64 },
}

impl Default for Init {
    fn default() -> Self {
        Init::HullMargin { margin_cells: 4.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub j: Vec<f64>,
    pub area: Vec<f64>,
    pub perimeter: Vec<f64>,
    pub residual_inf: Vec<f64>,
    pub residual_l2: Vec<f64>,
    /// Accepted time step leading to each iterate (0 for the initial one).
    pub dt: Vec<f64>,
    pub backtracks: Vec<usize>,
}

/// Per-vertex samples on the final boundary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub loop_id: Vec<usize>,
    pub weight: Vec<f64>,
    pub grad_u: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grad_v: Vec<f64>,
    pub g: Vec<f64>,
    pub x_dot_nu: Vec<f64>,
    pub free: Vec<bool>,
    pub contact: Vec<bool>,
    pub flagged: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub problem: Problem,
    pub status: Status,
    pub iterations: usize,
    pub history: History,
    pub final_j: f64,
    pub residual_inf: f64,
    pub residual_l2: f64,
    pub area: f64,
    pub perimeter: f64,
    /// Arclength-weighted mean and standard deviation of `|x|` on the boundary.
    pub mean_radius: f64,
    pub radius_std: f64,
    /// Fraction of boundary length within `2h` of `∂C_f`.
    pub hull_contact_fraction: f64,
    /// `max |∇u| / g` (product form for the cascade problem) over contact
    /// vertices; at most 1 when the contact condition holds.
    pub contact_ratio_max: Option<f64>,
    pub flagged_vertices: usize,
    /// `∫_{∂Ω} |∇u|` and `∫_Ω f` (Green compatibility).
    pub boundary_flux: f64,
    pub source_mass: f64,
    pub linear_iterations: usize,
    pub boundary: BoundarySamples,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub level_set: LevelSet,
    #[serde(skip)]
    pub trace: Option<BoundaryTrace>,
    #[serde(skip)]
    pub fields: Vec<ScalarField>,
}

/// Everything computed on one candidate domain.
struct Eval {
    ls: LevelSet,
    sols: Vec<PoissonSolution>,
    trace: BoundaryTrace,
    grads: Vec<BoundaryGradient>,
    g: Vec<f64>,
    speed: Vec<f64>,
    residual: Vec<f64>,
    free: Vec<bool>,
    contact: Vec<bool>,
    flagged: Vec<bool>,
    j: f64,
    area: f64,
}

impl Eval {
    fn residual_inf(&self) -> f64 {
        self.residual
            .iter()
            .zip(&self.free)
            .filter(|(_, &f)| f)
            .map(|(r, _)| *r)
            .fold(0.0, f64::max)
    }

    fn residual_l2(&self) -> f64 {
        let w = &self.trace.weights;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..w.len() {
            if self.free[k] {
                num += w[k] * self.residual[k] * self.residual[k];
                den += w[k];
            }
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            0.0
        }
    }

    fn n_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    fn all_contact(&self) -> bool {
        self.contact.iter().all(|&c| c)
    }

    fn max_speed(&self) -> f64 {
        self.speed.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// `J_{f,g}(Ω) = ∫|∇u|^2 - 2∫fu + ∫g^2`.
///
/// The Dirichlet term is the discrete energy `u^T A u`; the other two are
/// cut-cell volume integrals.
pub fn functional_qs(ls: &LevelSet, f: &SourceSpec, g: &GSpec) -> Result<f64> {
    let sol = solve_poisson_with(ls, Rhs::Source(f), &PoissonOptions::default(), None)?;
    Ok(qs_value(&sol, g))
}

fn qs_value(sol: &PoissonSolution, g: &GSpec) -> f64 {
    let fu = sol.f.zip_with(&sol.u, |a, b| a * b);
    let g2 = |p: Point| g.eval(p).powi(2);
    sol.energy - 2.0 * volume_integral(&sol.ls, Integrand::Field(&fu))
        + volume_integral(&sol.ls, Integrand::Fn(&g2))
}

/// `J_g(Ω) = ∫g - ½∫u^2` (or `∫g^2 - ½∫u^2` with `g_squared`), `u` from a
/// single Poisson solve.
pub fn functional_bilap(ls: &LevelSet, f: &SourceSpec, g: &GSpec, g_squared: bool) -> Result<f64> {
    let sol = solve_poisson_with(ls, Rhs::Source(f), &PoissonOptions::default(), None)?;
    Ok(bilap_value(&sol, g, g_squared))
}

fn bilap_value(sol: &PoissonSolution, g: &GSpec, g_squared: bool) -> f64 {
    let u2 = sol.u.map(|v| v * v);
    let gp = |p: Point| if g_squared { g.eval(p).powi(2) } else { g.eval(p) };
    volume_integral(&sol.ls, Integrand::Fn(&gp)) - 0.5 * volume_integral(&sol.ls, Integrand::Field(&u2))
}

/// Normal speed `|∇u|^2 - g^2`; zero at flagged vertices.
pub fn shape_velocity_qs(bg: &BoundaryGradient, g: &[f64]) -> Vec<f64> {
    bg.values
        .iter()
        .zip(g)
        .zip(&bg.flagged)
        .map(|((&d, &g), &fl)| if fl { 0.0 } else { d * d - g * g })
        .collect()
}

/// Normal speed `|∇u||∇v| - g` (`- g^2` with `g_squared`); zero at vertices
/// flagged in either gradient.
pub fn shape_velocity_bilap(bu: &BoundaryGradient, bv: &BoundaryGradient, g: &[f64], g_squared: bool) -> Vec<f64> {
    (0..g.len())
        .map(|k| {
            if bu.flagged[k] || bv.flagged[k] {
                0.0
            } else {
                let target = if g_squared { g[k] * g[k] } else { g[k] };
                bu.values[k] * bv.values[k] - target
            }
        })
        .collect()
}

/// Extend vertex speeds to nodes with `|phi| < 6h` by taking the value at
/// the closest point of the polyline (linear along each segment); zero
/// elsewhere.
pub fn extend_velocity(ls: &LevelSet, trace: &BoundaryTrace, speed: &[f64]) -> ScalarField {
    let grid = ls.grid;
    let h = grid.h();
    let segs = trace.segments();
    let pairs: Vec<(Point, Point)> = segs.iter().map(|s| (s.0, s.1)).collect();
    let mut out = ScalarField::zeros(grid);
    if pairs.is_empty() {
        return out;
    }
    let index = SegmentIndex::new(&pairs, 4.0 * h);
    let mut hint = None;
    for (i, j) in grid.node_iter() {
        let k = grid.idx(i, j);
        if ls.phi[k].abs() >= 6.0 * h {
            continue;
        }
        if let Some(n) = index.nearest_with_hint(grid.node(i, j), hint) {
            hint = Some(n.segment);
            let (_, _, a, b) = segs[n.segment];
            out.values[k] = (1.0 - n.t) * speed[a] + n.t * speed[b];
        }
    }
    out
}

/// One explicit Godunov upwind step of `phi_t + V |∇phi| = 0`; positive `V`
/// moves the interface outwards.
pub fn advect(ls: &LevelSet, speed: &ScalarField, dt: f64) -> LevelSet {
    let g = ls.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut phi = ls.phi.clone();
    for (i, j) in g.node_iter() {
        let k = g.idx(i, j);
        let v = speed.values[k];
        if v == 0.0 {
            continue;
        }
        let c = ls.phi[k];
        let dxm = if i > 0 { (c - ls.phi[k - 1]) / hx } else { 0.0 };
        let dxp = if i < g.nx { (ls.phi[k + 1] - c) / hx } else { 0.0 };
        let dym = if j > 0 { (c - ls.phi[k - g.nodes_x()]) / hy } else { 0.0 };
        let dyp = if j < g.ny { (ls.phi[k + g.nodes_x()] - c) / hy } else { 0.0 };
        let grad = if v > 0.0 {
            (dxm.max(0.0).powi(2) + dxp.min(0.0).powi(2) + dym.max(0.0).powi(2) + dyp.min(0.0).powi(2))
                .sqrt()
        } else {
            (dxm.min(0.0).powi(2) + dxp.max(0.0).powi(2) + dym.min(0.0).powi(2) + dyp.max(0.0).powi(2))
                .sqrt()
        };
        phi[k] = c - dt * v * grad;
    }
    LevelSet { grid: g, phi }
}

/// Extend `speed`, advect with `dt = cfl h / max|speed|`, and reinitialize
/// when `reinit` is set. Zero speed returns the input unchanged.
pub fn extend_and_advect(
    ls: &LevelSet,
    trace: &BoundaryTrace,
    speed: &[f64],
    cfl: f64,
    reinit: bool,
) -> Result<LevelSet> {
    let vmax = speed.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(ls.clone());
    }
    let ext = extend_velocity(ls, trace, speed);
    let out = advect(ls, &ext, cfl * ls.grid.h() / vmax);
    if reinit {
        reinitialize(&out)
    } else if out.has_interface() {
        Ok(out)
    } else {
        Err(Error::EmptyOrFull)
    }
}

/// `phi <- min(phi, phi_hull)`: union with `C_f`.
pub fn project_containment(ls: &LevelSet, hull: &LevelSet) -> LevelSet {
    let mut out = ls.clone();
    out.union_with(hull);
    out
}

/// Level set of the support hull `C_f` on `grid`.
pub fn hull_level_set(f: &SourceSpec, grid: Grid) -> Result<LevelSet> {
    signed_distance(&f.hull_shape(), grid)
}

pub fn initial_level_set(f: &SourceSpec, init: &Init, grid: Grid) -> Result<LevelSet> {
    let hull = hull_level_set(f, grid)?;
    let ls = match init {
        Init::Shape(s) => signed_distance(s, grid)?,
        Init::HullMargin { margin_cells } => {
            let m = margin_cells * grid.h();
            let out = LevelSet { grid, phi: hull.phi.iter().map(|v| v - m).collect() };
            if out.touches_box() {
                return Err(Error::ShapeTouchesBox { margin: m });
            }
            out
        }
    };
    Ok(project_containment(&ls, &hull))
}

/// Descent driver shared by both problems.
pub struct Descent<'a> {
    pub problem: Problem,
    pub f: &'a SourceSpec,
    pub g: &'a GSpec,
    pub params: DescentParams,
    hull: LevelSet,
    hull_shape: Shape,
}

impl<'a> Descent<'a> {
    pub fn new(problem: Problem, f: &'a SourceSpec, g: &'a GSpec, params: DescentParams, grid: Grid) -> Result<Self> {
        params.validate()?;
        g.validate()?;
        Ok(Self { problem, f, g, params, hull: hull_level_set(f, grid)?, hull_shape: f.hull_shape() })
    }

    pub fn hull(&self) -> &LevelSet {
        &self.hull
    }

    fn evaluate(&self, ls: &LevelSet, warm: &[ScalarField]) -> Result<Eval> {
        let opts = self.params.poisson();
        let depth = match self.problem {
            Problem::Qs => 1,
            Problem::Bilap { .. } => 2,
        };
        let mut sols: Vec<PoissonSolution> = Vec::with_capacity(depth);
        for d in 0..depth {
            let w = warm.get(d);
            let sol = if d == 0 {
                solve_poisson_with(ls, Rhs::Source(self.f), &opts, w)?
            } else {
                let prev = sols[d - 1].u.clone();
                solve_poisson_with(ls, Rhs::Field(&prev), &opts, w)?
            };
            sols.push(sol);
        }
        let trace = extract_boundary(ls)?;
        let grads: Vec<BoundaryGradient> = sols.iter().map(|s| boundary_gradient_on(s, trace.clone())).collect();
        let g = self.g.sample(&trace.points)?;
        let h = ls.grid.h();
        let n = trace.len();
        let flagged: Vec<bool> = (0..n).map(|k| grads.iter().any(|b| b.flagged[k])).collect();
        let hull_d: Vec<f64> = trace.points.iter().map(|&p| self.hull_shape.signed_distance(p)).collect();
        let contact: Vec<bool> = hull_d.iter().map(|&d| d <= h).collect();
        let free: Vec<bool> = (0..n).map(|k| hull_d[k] > 2.0 * h && !flagged[k]).collect();
        let (mut speed, residual, j) = match self.problem {
            Problem::Qs => {
                let speed = shape_velocity_qs(&grads[0], &g);
                let res = (0..n).map(|k| (grads[0].values[k] - g[k]).abs() / g[k]).collect::<Vec<_>>();
                (speed, res, qs_value(&sols[0], self.g))
            }
            Problem::Bilap { g_squared } => {
                let speed = shape_velocity_bilap(&grads[0], &grads[1], &g, g_squared);
                let res = (0..n)
                    .map(|k| {
                        let t = if g_squared { g[k] * g[k] } else { g[k] };
                        (grads[0].values[k] * grads[1].values[k] - t).abs() / t
                    })
                    .collect::<Vec<_>>();
                (speed, res, bilap_value(&sols[0], self.g, g_squared))
            }
        };
        // the hull cannot be entered: contact vertices may only move outwards
        for k in 0..n {
            if contact[k] {
                speed[k] = speed[k].max(0.0);
            }
        }
        let area = volume_integral(ls, Integrand::Const(1.0));
        Ok(Eval {
            ls: ls.clone(),
            sols,
            trace,
            grads,
            g,
            speed,
            residual,
            free,
            contact,
            flagged,
            j,
            area,
        })
    }

    fn trial(&self, cur: &Eval, dt: f64, reinit: bool) -> Result<LevelSet> {
        let ext = extend_velocity(&cur.ls, &cur.trace, &cur.speed);
        let mut next = advect(&cur.ls, &ext, dt);
        if reinit {
            next = reinitialize(&next)?;
        }
        let next = project_containment(&next, &self.hull);
        if next.touches_box() {
            return Err(Error::ShapeTouchesBox { margin: 0.0 });
        }
        Ok(next)
    }

    /// Run the descent from `init`. `observer` sees every accepted iterate.
    pub fn run(&self, init: &LevelSet, mut observer: impl FnMut(usize, &LevelSet, &BoundaryTrace)) -> Result<SolveReport> {
        let init = project_containment(init, &self.hull);
        let mut cur = self.evaluate(&init, &[])?;
        let mut history = History::default();
        let mut linear_iterations: usize = cur.sols.iter().map(|s| s.iterations).sum();
        push_history(&mut history, &cur, 0.0, 0);
        observer(0, &cur.ls, &cur.trace);
        let h = init.grid.h();
        let mut status = Status::MaxIters;
        let mut error = None;
        let mut iter = 0;
        loop {
            if cur.all_contact() || cur.n_free() == 0 {
                status = Status::ConstrainedAtHull;
                break;
            }
            if cur.residual_inf() <= self.params.tol_residual {
                status = Status::Converged;
                break;
            }
            if iter >= self.params.max_iters {
                break;
            }
            let vmax = cur.max_speed();
            if vmax == 0.0 {
                status = Status::Stalled;
                break;
            }
            let reinit = (iter + 1) % self.params.reinit_every == 0;
            let mut dt = self.params.cfl * h / vmax;
            let mut accepted = None;
            for bt in 0..=self.params.backtrack_max {
                let next = match self.trial(&cur, dt, reinit) {
                    Ok(n) => n,
                    Err(e) => {
                        error = Some(e);
                        break;
                    }
                };
                let warm: Vec<ScalarField> = cur.sols.iter().map(|s| s.u.clone()).collect();
                match self.evaluate(&next, &warm) {
                    Ok(ev) => {
                        linear_iterations += ev.sols.iter().map(|s| s.iterations).sum::<usize>();
                        if ev.j <= cur.j + 1e-12 * cur.j.abs() {
                            accepted = Some((ev, dt, bt));
                            break;
                        }
                    }
                    Err(e) => {
                        error = Some(e);
                        break;
                    }
                }
                dt *= 0.5;
            }
            if error.is_some() {
                status = Status::Failed;
                break;
            }
            match accepted {
                Some((ev, dt, bt)) => {
                    cur = ev;
                    iter += 1;
                    push_history(&mut history, &cur, dt, bt);
                    observer(iter, &cur.ls, &cur.trace);
                }
                None => {
                    status = Status::Stalled;
                    break;
                }
            }
        }
        Ok(self.report(cur, status, iter, history, linear_iterations, error.map(|e| e.to_string())))
    }

    fn report(
        &self,
        cur: Eval,
        status: Status,
        iterations: usize,
        history: History,
        linear_iterations: usize,
        error: Option<String>,
    ) -> SolveReport {
        let t = &cur.trace;
        let w = &t.weights;
        let per = t.perimeter();
        let radii: Vec<f64> = t.points.iter().map(|p| p[0].hypot(p[1])).collect();
        let mean = t.integrate(&radii) / per;
        let var = w.iter().zip(&radii).map(|(w, r)| w * (r - mean).powi(2)).sum::<f64>() / per;
        // vertices that are not free for lack of room, which is the stopping test
        let near_len = (0..w.len()).filter(|&k| !cur.free[k] && !cur.flagged[k]).fold(0.0, |s, k| s + w[k]);
        let ratio = |k: usize| match self.problem {
            Problem::Qs => cur.grads[0].values[k] / cur.g[k],
            Problem::Bilap { g_squared } => {
                let t = if g_squared { cur.g[k] * cur.g[k] } else { cur.g[k] };
                cur.grads[0].values[k] * cur.grads[1].values[k] / t
            }
        };
        let contact_ratio_max = (0..t.len())
            .filter(|&k| cur.contact[k] && !cur.flagged[k])
            .map(ratio)
            .reduce(f64::max);
        let boundary = BoundarySamples {
            x: t.points.iter().map(|p| p[0]).collect(),
            y: t.points.iter().map(|p| p[1]).collect(),
            loop_id: t.loop_id.clone(),
            weight: w.clone(),
            grad_u: cur.grads[0].values.clone(),
            grad_v: cur.grads.get(1).map(|b| b.values.clone()).unwrap_or_default(),
            g: cur.g.clone(),
            x_dot_nu: t.points.iter().zip(&t.normals).map(|(p, n)| p[0] * n[0] + p[1] * n[1]).collect(),
            free: cur.free.clone(),
            contact: cur.contact.clone(),
            flagged: cur.flagged.clone(),
        };
        SolveReport {
            problem: self.problem,
            status,
            iterations,
            final_j: cur.j,
            residual_inf: cur.residual_inf(),
            residual_l2: cur.residual_l2(),
            area: cur.area,
            perimeter: per,
            mean_radius: mean,
            radius_std: var.sqrt(),
            hull_contact_fraction: near_len / per,
            contact_ratio_max,
            flagged_vertices: cur.flagged.iter().filter(|&&f| f).count(),
            boundary_flux: cur.grads[0].integral(),
            source_mass: self.f.mass_in_hull(),
            linear_iterations,
            boundary,
            error,
            history,
            level_set: cur.ls,
            trace: Some(cur.trace),
            fields: cur.sols.into_iter().map(|s| s.u).collect(),
        }
    }
}

fn push_history(h: &mut History, e: &Eval, dt: f64, bt: usize) {
    h.j.push(e.j);
    h.area.push(e.area);
    h.perimeter.push(e.trace.perimeter());
    h.residual_inf.push(e.residual_inf());
    h.residual_l2.push(e.residual_l2());
    h.dt.push(dt);
    h.backtracks.push(bt);
}

pub fn solve_qs(f: &SourceSpec, g: &GSpec, init: &Init, grid: Grid, params: DescentParams) -> Result<SolveReport> {
    let d = Descent::new(Problem::Qs, f, g, params, grid)?;
    let ls = initial_level_set(f, init, grid)?;
    d.run(&ls, |_, _, _| {})
}

pub fn solve_bilap(
    f: &SourceSpec,
    g: &GSpec,
    init: &Init,
    grid: Grid,
    params: DescentParams,
    g_squared: bool,
) -> Result<SolveReport> {
    let d = Descent::new(Problem::Bilap { g_squared }, f, g, params, grid)?;
    let ls = initial_level_set(f, init, grid)?;
    d.run(&ls, |_, _, _| {})
}
