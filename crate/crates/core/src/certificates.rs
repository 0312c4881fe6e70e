//! Computable existence conditions: each certificate evaluates an
//! inequality `lhs <= rhs` on the support hull `C_f` (or a given convex
//! domain) and reports whether it holds strictly, fails, or is tight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{signed_distance, volume_integral, Grid, Integrand, LevelSet, Point, Shape, SourceSpec};
use crate::pde::{
    boundary_gradient, first_eigenvalue, solve_cascade, solve_poisson, BoundaryGradient, PoissonSolution, Rhs,
};
use crate::shapeopt::GSpec;
use crate::{Error, Result};

/// Default relative tolerance for the equality verdict.
pub const TOL_EQ: f64 = 0.02;

/// Certificates whose firing is sufficient for existence.
pub const SUFFICIENT: [&str; 3] = ["qs_sufficient", "bilap_sufficient", "cs_sqrt_fu"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `lhs < rhs` beyond the tolerance.
    Fires,
    Fails,
    /// `|margin| <= tol_eq`: the equality branch of a dichotomy.
    EqualityCase,
}

impl Verdict {
    pub fn from_margin(margin: f64, tol_eq: f64) -> Self {
        if margin.abs() <= tol_eq {
            Verdict::EqualityCase
        } else if margin > 0.0 {
            Verdict::Fires
        } else {
            Verdict::Fails
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Fires => "fires",
            Verdict::Fails => "fails",
            Verdict::EqualityCase => "equality_case",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / |rhs|`
    pub margin: f64,
    pub verdict: Verdict,
    /// Solves the values depend on.
    pub provenance: Vec<String>,
    /// Hypothesis checks and warnings.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Auxiliary scalars (e.g. the induced boundary datum of a dichotomy).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CertificateReport {
    pub fn new(id: &str, lhs: f64, rhs: f64, tol_eq: f64) -> Result<Self> {
        if !(lhs.is_finite() && rhs.is_finite()) || rhs == 0.0 {
            return Err(Error::Degenerate(format!("certificate {id}: lhs={lhs}, rhs={rhs}")));
        }
        let margin = (rhs - lhs) / rhs.abs();
        Ok(Self {
            id: id.to_string(),
            lhs,
            rhs,
            margin,
            verdict: Verdict::from_margin(margin, tol_eq),
            provenance: Vec::new(),
            notes: Vec::new(),
            details: BTreeMap::new(),
        })
    }

    fn with_provenance(mut self, p: &[&str]) -> Self {
        self.provenance = p.iter().map(|s| s.to_string()).collect();
        self
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn fires(&self) -> bool {
        self.verdict == Verdict::Fires
    }

    pub fn csv_header() -> &'static str {
        "id,lhs,rhs,margin,verdict"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.id, self.lhs, self.rhs, self.margin, self.verdict.as_str())
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
const GL3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `∫_{∂P} h ds` over a closed polygon, 3-point Gauss per edge.
pub fn polygon_boundary_integral(poly: &[Point], h: impl Fn(Point) -> f64) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        for (t, w) in GL3 {
            total += w * len * h([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    total
}

/// `Φ_h` of a shape boundary: polygons are integrated edge by edge, disks
/// through their hull polygon.
pub fn shape_boundary_integral(shape: &Shape, h: impl Fn(Point) -> f64) -> Result<f64> {
    match shape {
        Shape::Polygon { vertices } => Ok(polygon_boundary_integral(vertices, h)),
        Shape::Disk { .. } => {
            let f = SourceSpec::new(vec![crate::SourcePiece { shape: shape.clone(), value: 1.0 }])?;
            Ok(polygon_boundary_integral(f.hull(), h))
        }
        Shape::Union(_) => Err(Error::InvalidShape("boundary integral of a union".into())),
    }
}

fn checked_g(g: &GSpec, p: Point) -> f64 {
    let v = g.eval(p);
    if v.is_finite() && v > 0.0 {
        v
    } else {
        f64::NAN
    }
}

fn phi_g(poly: &[Point], g: &GSpec, h: impl Fn(f64) -> f64) -> Result<f64> {
    let v = polygon_boundary_integral(poly, |p| h(checked_g(g, p)));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidG("g is not positive on the hull boundary".into()))
    }
}

/// `∫_{∂C_f} g < ∫_{C_f} f`, both sides exact on the hull polygon.
pub fn cert_qs_sufficient(f: &SourceSpec, g: &GSpec) -> Result<CertificateReport> {
    cert_qs_sufficient_tol(f, g, TOL_EQ)
}

pub fn cert_qs_sufficient_tol(f: &SourceSpec, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
    let lhs = phi_g(f.hull(), g, |v| v)?;
    Ok(CertificateReport::new("qs_sufficient", lhs, f.mass_in_hull(), tol_eq)?.with_provenance(&[]))
}

/// `(∫_{∂C_f} √g)^2 / ∫_{C_f} u_{C_f} < ∫_{C_f} f`.
pub fn cert_bilap_sufficient(f: &SourceSpec, g: &GSpec, grid: Grid) -> Result<CertificateReport> {
    Solves::new(f, grid)?.bilap_sufficient(g, TOL_EQ)
}

/// A superharmonic test function `phi(x) = sum_k c_k |x - center|^{2k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialPolynomial {
    #[serde(default)]
    pub center: Point,
    /// Coefficients of `1, r^2, r^4, ...`
    pub coefficients: Vec<f64>,
}

impl RadialPolynomial {
    pub fn eval(&self, p: Point) -> f64 {
        let r2 = (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2);
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
    }

    /// Exact Laplacian: `Δ r^{2k} = 4k^2 r^{2k-2}` in two dimensions.
    pub fn laplacian(&self, p: Point) -> f64 {
        let r2 = (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2);
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * 4.0 * (k * k) as f64 * r2.powi(k as i32 - 1))
            .sum()
    }

    /// `2 rho^2 - r^2` with `rho` the largest distance from the origin to the
    /// hull: positive on `C_f` with constant Laplacian `-4`.
    pub fn default_for(hull: &[Point]) -> Self {
        let rho2 = hull.iter().map(|p| p[0] * p[0] + p[1] * p[1]).fold(0.0, f64::max);
        Self { center: [0.0, 0.0], coefficients: vec![2.0 * rho2.max(1e-12), -1.0] }
    }
}

/// Ordered means of positive values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeansChain {
    pub min: f64,
    pub harmonic: f64,
    pub geometric: f64,
    pub arithmetic: f64,
    /// `sqrt(mean of squares)`
    pub root_quadratic: f64,
    /// Mean of squares.
    pub quadratic: f64,
    pub max: f64,
    /// Whether `min <= H <= G <= A <= sqrt(Q) <= max` holds (to rounding).
    pub ordered: bool,
    /// Order in which an existence result for the smallest mean propagates.
    pub propagation: Vec<&'static str>,
}

impl MeansChain {
    pub fn as_array(&self) -> [f64; 6] {
        [self.min, self.harmonic, self.geometric, self.arithmetic, self.root_quadratic, self.max]
    }
}

pub fn means_chain(values: &[f64]) -> Result<MeansChain> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("means of an empty list".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("means need positive values, got {v}")));
    }
    let n = values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(0.0, f64::max);
    let harmonic = n / values.iter().map(|v| 1.0 / v).sum::<f64>();
    let geometric = (values.iter().map(|v| v.ln()).sum::<f64>() / n).exp();
    let arithmetic = values.iter().sum::<f64>() / n;
    let quadratic = values.iter().map(|v| v * v).sum::<f64>() / n;
    let root_quadratic = quadratic.sqrt();
    // rounding in exp/ln and sqrt can invert exact ties
    let slack = 1e-12 * max;
    let chain = [min, harmonic, geometric, arithmetic, root_quadratic, max];
    let ordered = chain.windows(2).all(|w| w[0] <= w[1] + slack);
    Ok(MeansChain {
        min,
        harmonic: harmonic.clamp(min, max),
        geometric: geometric.clamp(min, max),
        arithmetic,
        root_quadratic: root_quadratic.clamp(min, max),
        quadratic,
        max,
        ordered,
        propagation: vec!["min", "harmonic", "geometric", "arithmetic", "root_quadratic", "max"],
    })
}

/// Solves on a fixed convex domain shared by the certificates.
pub struct Solves {
    pub domain: Shape,
    pub ls: LevelSet,
    pub area: f64,
    pub perimeter: f64,
    hull: Vec<Point>,
    /// `f`-driven cascade (absent for the unit-source constructors).
    pub f: Option<SourceSpec>,
    pub u: Option<Cascade>,
    /// Cascade for `f = 1`.
    pub u1: Cascade,
}

/// `u = u_C`, `v = v_C` with `-Δv = u`, and their boundary gradients.
pub struct Cascade {
    pub u: PoissonSolution,
    pub v: PoissonSolution,
    pub du: BoundaryGradient,
    pub dv: BoundaryGradient,
}

impl Cascade {
    fn new(ls: &LevelSet, rhs: Rhs<'_>) -> Result<Self> {
        let mut sols = solve_cascade(ls, rhs, 2)?;
        let v = sols.pop().expect("depth 2");
        let u = sols.pop().expect("depth 2");
        let du = boundary_gradient(&u)?;
        let dv = boundary_gradient(&v)?;
        Ok(Self { u, v, du, dv })
    }

    pub fn int_u(&self) -> f64 {
        volume_integral(&self.u.ls, Integrand::Field(&self.u.u))
    }

    pub fn int_uv(&self) -> f64 {
        let uv = self.u.u.zip_with(&self.v.u, |a, b| a * b);
        volume_integral(&self.u.ls, Integrand::Field(&uv))
    }
}

fn band(ls: &LevelSet, width: f64) -> LevelSet {
    LevelSet { grid: ls.grid, phi: ls.phi.iter().map(|v| v + width).collect() }
}

impl Solves {
    /// Solves on `C_f` for both `f` and the unit source.
    pub fn new(f: &SourceSpec, grid: Grid) -> Result<Self> {
        let mut s = Self::on_domain(&f.hull_shape(), grid)?;
        s.u = Some(Cascade::new(&s.ls, Rhs::Source(f))?);
        s.f = Some(f.clone());
        Ok(s)
    }

    /// Unit-source solves on a convex domain.
    pub fn on_domain(domain: &Shape, grid: Grid) -> Result<Self> {
        if matches!(domain, Shape::Union(_)) {
            return Err(Error::InvalidShape("certificate domain must be convex".into()));
        }
        // the hull of a single piece is the domain itself when it is convex
        let spec = SourceSpec::new(vec![crate::SourcePiece { shape: domain.clone(), value: 1.0 }])?;
        let hull = spec.hull().to_vec();
        let domain = spec.hull_shape();
        let ls = signed_distance(&domain, grid)?;
        let u1 = Cascade::new(&ls, Rhs::Const(1.0))?;
        Ok(Self {
            area: spec.hull_area(),
            perimeter: spec.hull_perimeter(),
            domain,
            ls,
            hull,
            f: None,
            u: None,
            u1,
        })
    }

    fn need_f(&self) -> Result<(&SourceSpec, &Cascade)> {
        match (&self.f, &self.u) {
            (Some(f), Some(u)) => Ok((f, u)),
            _ => Err(Error::InvalidParameter("certificate needs the source f".into())),
        }
    }

    pub fn hull(&self) -> &[Point] {
        &self.hull
    }

    pub fn qs_sufficient(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (f, _) = self.need_f()?;
        cert_qs_sufficient_tol(f, g, tol_eq)
    }

    pub fn bilap_sufficient(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (f, c) = self.need_f()?;
        let s = phi_g(&self.hull, g, f64::sqrt)?;
        let lhs = s * s / c.int_u();
        Ok(CertificateReport::new("bilap_sufficient", lhs, f.mass_in_hull(), tol_eq)?.with_provenance(&["u_C(f)"]))
    }

    /// `∫_{∂C} √g < ∫_C √(f u_C)`.
    pub fn cs_sqrt_fu(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (_, c) = self.need_f()?;
        let lhs = phi_g(&self.hull, g, f64::sqrt)?;
        let fu = c.u.f.zip_with(&c.u.u, |a, b| (a * b.max(0.0)).sqrt());
        let rhs = volume_integral(&self.ls, Integrand::Field(&fu));
        Ok(CertificateReport::new("cs_sqrt_fu", lhs, rhs, tol_eq)?.with_provenance(&["u_C(f)"]))
    }

    /// `(∫_{∂C} √g)^2 <= |∂C| ∫_C f` under `|∇u_C| >= g`; equality is the
    /// `|∇u_C| = g` branch.
    pub fn cs_grad_u(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (f, c) = self.need_f()?;
        let s = phi_g(&self.hull, g, f64::sqrt)?;
        let mut r = CertificateReport::new("cs_grad_u", s * s, self.perimeter * f.mass_in_hull(), tol_eq)?
            .with_provenance(&["u_C(f)"]);
        self.hypothesis(&mut r, &c.du, None, g);
        let mean_sqrt = s / self.perimeter;
        r.details.insert("induced_scale".into(), mean_sqrt);
        Ok(r)
    }

    /// `(∫_{∂C} √g)^2 <= |∂C| ∫_C u_C` under `|∇v_C| >= g`.
    pub fn cs_grad_v(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (_, c) = self.need_f()?;
        let s = phi_g(&self.hull, g, f64::sqrt)?;
        let mut r = CertificateReport::new("cs_grad_v", s * s, self.perimeter * c.int_u(), tol_eq)?
            .with_provenance(&["u_C(f)", "v_C(f)"]);
        self.hypothesis(&mut r, &c.dv, None, g);
        r.details.insert("induced_scale".into(), s / self.perimeter);
        Ok(r)
    }

    /// Green identity with a superharmonic weight:
    /// `∫_{∂C} |∇u_C| phi <= ∫_C f phi`.
    pub fn green_superharmonic(&self, phi: &RadialPolynomial, tol_eq: f64) -> Result<CertificateReport> {
        let (f, c) = self.need_f()?;
        let g = self.ls.grid;
        let mut worst_lap = f64::NEG_INFINITY;
        let mut min_phi = f64::INFINITY;
        for (i, j) in g.node_iter() {
            if self.ls.is_inside(g.idx(i, j)) {
                let p = g.node(i, j);
                worst_lap = worst_lap.max(phi.laplacian(p));
                min_phi = min_phi.min(phi.eval(p));
            }
        }
        for &p in &self.hull {
            worst_lap = worst_lap.max(phi.laplacian(p));
            min_phi = min_phi.min(phi.eval(p));
        }
        if worst_lap > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "test function is not superharmonic on the hull (max laplacian {worst_lap})"
            )));
        }
        if min_phi <= 0.0 {
            return Err(Error::InvalidParameter("test function must be positive on the hull".into()));
        }
        let lhs = c.du.integral_of(|d, p| d * phi.eval(p));
        let rhs = f.weighted_mass(&|p| phi.eval(p));
        let mut r = CertificateReport::new("green_superharmonic", lhs, rhs, tol_eq)?.with_provenance(&["u_C(f)"]);
        r.details.insert("max_laplacian".into(), worst_lap);
        flag_note(&mut r, &c.du);
        Ok(r)
    }

    /// `∫_{∂C} g <= ∫_C u = ∫_C u √v/√v <= (∫ uv)^{1/2} (∫ u/v)^{1/2}` under
    /// `g <= |∇v_C|`. `u/v` is integrated over `{phi < -2h}`.
    pub fn cs_uv_ratio(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let (_, c) = self.need_f()?;
        let lhs = phi_g(&self.hull, g, |v| v)?;
        let h = self.ls.grid.h();
        let inner = band(&self.ls, 2.0 * h);
        let ratio = c.u.u.zip_with(&c.v.u, |a, b| if b > 0.0 { a / b } else { 0.0 });
        let int_ratio = volume_integral(&inner, Integrand::Field(&ratio));
        let int_uv = c.int_uv();
        let rhs = (int_uv * int_ratio).sqrt();
        let mut r = CertificateReport::new("cs_uv_ratio", lhs, rhs, tol_eq)?.with_provenance(&["u_C(f)", "v_C(f)"]);
        self.hypothesis(&mut r, &c.dv, None, g);
        r.details.insert("truncation_band".into(), 2.0 * h);
        r.details.insert("gamma".into(), lhs / int_ratio);
        r.details.insert("delta".into(), lhs / int_uv);
        Ok(r)
    }

    /// `|∂C|^2 <= ∫_{∂C} |∇v| ∫_{∂C} 1/|∇v|` for the unit-source cascade;
    /// equality means `|∇v|` is constant (a ball).
    pub fn cs_inverse_grad_v(&self, tol_eq: f64) -> Result<CertificateReport> {
        let dv = &self.u1.dv;
        let inv: Vec<f64> = dv.values.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect();
        let int_inv = dv.trace.integrate_masked(&inv, &dv.usable());
        let lhs = self.perimeter * self.perimeter;
        let rhs = dv.integral() * int_inv;
        let mut r = CertificateReport::new("cs_inverse_grad_v", lhs, rhs, tol_eq)?.with_provenance(&["u_C(1)", "v_C(1)"]);
        r.details.insert("gamma".into(), self.perimeter / int_inv);
        flag_note(&mut r, dv);
        Ok(r)
    }

    /// `(∫_{∂C} √g)^2 <= |C| ∫_C u_C` for the unit source, under
    /// `g <= |∇u_C||∇v_C|`.
    pub fn cs_sqrt_g_volume(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let s = phi_g(&self.hull, g, f64::sqrt)?;
        let mut r = CertificateReport::new("cs_sqrt_g_volume", s * s, self.area * self.u1.int_u(), tol_eq)?
            .with_provenance(&["u_C(1)", "v_C(1)"]);
        self.hypothesis(&mut r, &self.u1.du, Some(&self.u1.dv), g);
        r.details.insert("gamma".into(), s / self.area);
        Ok(r)
    }

    /// `λ_1(C) ∫_C u_C <= |C|` for the unit source, plus the induced
    /// comparison `∫_{∂C} g` against `(1/λ_1) ∫ 1/u_C` over `{phi < -2h}`.
    pub fn lambda1(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let eig = first_eigenvalue(&self.ls)?;
        let int_u = self.u1.int_u();
        let mut r = CertificateReport::new("lambda1", eig.lambda * int_u, self.area, tol_eq)?
            .with_provenance(&["u_C(1)", "lambda_1(C)"]);
        let h = self.ls.grid.h();
        let inv = self.u1.u.u.map(|v| if v > 0.0 { 1.0 / v } else { 0.0 });
        let int_inv = volume_integral(&band(&self.ls, 2.0 * h), Integrand::Field(&inv));
        r.details.insert("lambda1".into(), eig.lambda);
        r.details.insert("int_u".into(), int_u);
        r.details.insert("boundary_g".into(), phi_g(&self.hull, g, |v| v)?);
        r.details.insert("inverse_u_over_lambda1".into(), int_inv / eig.lambda);
        r.details.insert("truncation_band".into(), 2.0 * h);
        Ok(r)
    }

    /// Pohozaev identity on the hull for the unit source.
    pub fn pohozaev(&self, tol_eq: f64) -> Result<CertificateReport> {
        pohozaev_from(&self.u1.u, &self.u1.du, tol_eq)
    }

    /// `(∫_{∂C} g)^2 <= (∫ |∇u|^2 x.ν)(∫ |∇v|^2 x.ν) = 16 ∫u ∫uv` for the
    /// unit-source cascade on a star-shaped hull, under
    /// `|∇u||∇v| x.ν >= g`.
    pub fn pohozaev_cascade(&self, g: &GSpec, tol_eq: f64) -> Result<CertificateReport> {
        let lhs = phi_g(&self.hull, g, |v| v)?.powi(2);
        let rhs = 16.0 * self.u1.int_u() * self.u1.int_uv();
        let mut r = CertificateReport::new("pohozaev_cascade", lhs, rhs, tol_eq)?
            .with_provenance(&["u_C(1)", "v_C(1)"]);
        star_note(&mut r, &self.u1.du);
        Ok(r)
    }

    /// Record whether the pointwise hypothesis `g <= |∇a|` (or
    /// `g <= |∇a||∇b|`) holds on the traced boundary.
    fn hypothesis(&self, r: &mut CertificateReport, a: &BoundaryGradient, b: Option<&BoundaryGradient>, g: &GSpec) {
        let mut worst = f64::INFINITY;
        for k in 0..a.values.len() {
            if a.flagged[k] || b.is_some_and(|b| b.flagged[k]) {
                continue;
            }
            let m = a.values[k] * b.map_or(1.0, |b| b.values[k]);
            let gv = g.eval(a.trace.points[k]);
            worst = worst.min((m - gv) / gv);
        }
        r.details.insert("hypothesis_min_relative".into(), worst);
        if worst < -TOL_EQ {
            r.note("pointwise hypothesis violated on the boundary");
        }
        flag_note(r, a);
    }
}

fn flag_note(r: &mut CertificateReport, bg: &BoundaryGradient) {
    let n = bg.flagged_count();
    if n > 0 {
        r.note(format!("{n} boundary vertices skipped (thin region)"));
    }
}

fn star_note(r: &mut CertificateReport, bg: &BoundaryGradient) {
    let bad = bg.trace.points.iter().zip(&bg.trace.normals).filter(|(p, n)| p[0] * n[0] + p[1] * n[1] <= 0.0).count();
    if bad > 0 {
        r.note(format!("not star-shaped about the origin: x.nu <= 0 at {bad} vertices"));
    }
}

fn pohozaev_from(sol: &PoissonSolution, bg: &BoundaryGradient, tol_eq: f64) -> Result<CertificateReport> {
    let t = &bg.trace;
    let vals: Vec<f64> = (0..t.len())
        .map(|k| {
            let (p, n) = (t.points[k], t.normals[k]);
            bg.values[k].powi(2) * (p[0] * n[0] + p[1] * n[1])
        })
        .collect();
    let lhs = t.integrate_masked(&vals, &bg.usable());
    let rhs = 4.0 * volume_integral(&sol.ls, Integrand::Field(&sol.u));
    let mut r = CertificateReport::new("pohozaev", lhs, rhs, tol_eq)?.with_provenance(&["u(1)"]);
    star_note(&mut r, bg);
    flag_note(&mut r, bg);
    Ok(r)
}

/// `∫_{∂Ω} |∇u|^2 x.ν = 4 ∫_Ω u` for `-Δu = 1` on an arbitrary domain.
pub fn pohozaev_check(ls: &LevelSet) -> Result<CertificateReport> {
    let sol = solve_poisson(ls, Rhs::Const(1.0))?;
    let bg = boundary_gradient(&sol)?;
    pohozaev_from(&sol, &bg, TOL_EQ)
}

/// `λ_1(C) ∫_C u_C <= |C|` on a convex domain.
pub fn cert_lambda1(domain: &Shape, g: &GSpec, grid: Grid) -> Result<CertificateReport> {
    Solves::on_domain(domain, grid)?.lambda1(g, TOL_EQ)
}

/// Options for the full registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateOptions {
    pub tol_eq: f64,
    /// Weight for the Green certificate; defaults to `2 rho^2 - r^2`.
    pub test_function: Option<RadialPolynomial>,
    /// Include the eigenvalue certificate (one extra inverse iteration).
    pub eigenvalue: bool,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { tol_eq: TOL_EQ, test_function: None, eigenvalue: true }
    }
}

/// Evaluate every certificate on `C_f`.
pub fn evaluate_all(f: &SourceSpec, g: &GSpec, grid: Grid, opts: &CertificateOptions) -> Result<Vec<CertificateReport>> {
    g.validate()?;
    let s = Solves::new(f, grid)?;
    let t = opts.tol_eq;
    let phi = opts.test_function.clone().unwrap_or_else(|| RadialPolynomial::default_for(f.hull()));
    let mut out = vec![
        s.qs_sufficient(g, t)?,
        s.bilap_sufficient(g, t)?,
        s.cs_sqrt_fu(g, t)?,
        s.cs_grad_u(g, t)?,
        s.cs_grad_v(g, t)?,
        s.green_superharmonic(&phi, t)?,
        s.cs_uv_ratio(g, t)?,
        s.cs_inverse_grad_v(t)?,
        s.cs_sqrt_g_volume(g, t)?,
    ];
    if opts.eigenvalue {
        out.push(s.lambda1(g, t)?);
    }
    out.push(s.pohozaev(t)?);
    out.push(s.pohozaev_cascade(g, t)?);
    Ok(out)
}

/// True when any sufficient certificate fires.
pub fn any_sufficient_fires(reports: &[CertificateReport]) -> bool {
    reports.iter().any(|r| SUFFICIENT.contains(&r.id.as_str()) && r.fires())
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_disk() -> (SourceSpec, Grid) {
        (SourceSpec::disk([0.0, 0.0], 1.0, 1.0).unwrap(), Grid::centered(1.5, 128).unwrap())
    }

    #[test]
    fn qs_examples() {
        let f = SourceSpec::disk([0.0, 0.0], 0.5, 4.0).unwrap();
        let r = cert_qs_sufficient(&f, &GSpec::constant(0.25)).unwrap();
        assert!((r.lhs - 0.25 * PI).abs() < 1e-4 && (r.rhs - PI).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Fires);
        assert_eq!(cert_qs_sufficient(&f, &GSpec::constant(2.0)).unwrap().verdict, Verdict::Fails);
        let tie = f.mass_in_hull() / f.hull_perimeter();
        let r = cert_qs_sufficient(&f, &GSpec::constant(tie)).unwrap();
        assert_eq!(r.verdict, Verdict::EqualityCase);
        assert!(r.margin.abs() < 1e-12);
    }

    #[test]
    fn radial_certificates_on_unit_disk() {
        let (f, grid) = unit_disk();
        let s = Solves::new(&f, grid).unwrap();
        let g = GSpec::constant(1.0 / 32.0);
        let psi = s.bilap_sufficient(&g, TOL_EQ).unwrap();
        assert!((psi.lhs / PI - 1.0).abs() < 0.02, "{}", psi.lhs);
        assert_eq!(psi.verdict, Verdict::EqualityCase);
        assert_eq!(s.bilap_sufficient(&GSpec::constant(1.0 / 64.0), TOL_EQ).unwrap().verdict, Verdict::Fires);
        assert_eq!(s.bilap_sufficient(&GSpec::constant(1.0 / 8.0), TOL_EQ).unwrap().verdict, Verdict::Fails);

        let v = s.cs_grad_v(&g, TOL_EQ).unwrap();
        assert!((v.lhs - PI * PI / 8.0).abs() < 1e-3);
        assert!((v.rhs / (PI * PI / 4.0) - 1.0).abs() < 0.02);
        assert_eq!(v.verdict, Verdict::Fires);

        assert_eq!(s.cs_inverse_grad_v(TOL_EQ).unwrap().verdict, Verdict::EqualityCase);
        let p = s.pohozaev(TOL_EQ).unwrap();
        assert!((p.lhs / (PI / 2.0) - 1.0).abs() < 0.02 && (p.rhs / (PI / 2.0) - 1.0).abs() < 0.02);
        assert_eq!(p.verdict, Verdict::EqualityCase);

        let phi = RadialPolynomial::default_for(f.hull());
        let green = s.green_superharmonic(&phi, TOL_EQ).unwrap();
        // ∫_C fφ = ∫_{∂C}|∇u|φ - ∫_C uΔφ with Δφ = -4
        let expect = green.rhs - 4.0 * PI / 8.0;
        assert!((green.lhs / expect - 1.0).abs() < 0.02);
    }

    #[test]
    fn lambda1_on_disk() {
        let (_, grid) = unit_disk();
        let r = cert_lambda1(&Shape::disk([0.0, 0.0], 1.0), &GSpec::constant(1.0), grid).unwrap();
        assert!((r.details["lambda1"] / 5.783_185_962_946_784 - 1.0).abs() < 0.02);
        assert_eq!(r.verdict, Verdict::Fires);
    }

    #[test]
    fn non_superharmonic_weight_rejected() {
        let (f, grid) = unit_disk();
        let s = Solves::new(&f, grid).unwrap();
        let phi = RadialPolynomial { center: [0.0, 0.0], coefficients: vec![1.0, 1.0] };
        assert!(s.green_superharmonic(&phi, TOL_EQ).is_err());
    }

    #[test]
    fn means_examples() {
        let m = means_chain(&[1.0, 4.0]).unwrap();
        let want = [1.0, 1.6, 2.0, 2.5, 8.5f64.sqrt(), 4.0];
        for (a, b) in m.as_array().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.ordered);
        let c = means_chain(&[3.0; 5]).unwrap();
        assert!(c.as_array().iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!((means_chain(&[1.0, 2.0, 4.0]).unwrap().geometric - 2.0).abs() < 1e-12);
        assert!(means_chain(&[1.0, 0.0]).is_err());
        assert!(means_chain(&[]).is_err());
    }
}
