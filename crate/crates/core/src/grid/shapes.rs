use serde::{Deserialize, Serialize};

use super::{convex_hull, cross, dist, dot, norm, sub, Point};
use crate::{Error, Result};

/// Number of boundary samples per disk piece when building the support hull.
pub const DISK_HULL_SAMPLES: usize = 512;

/// Geometric primitive or union of primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Disk { center: Point, radius: f64 },
    /// Convex polygon; either orientation is accepted on input.
    Polygon { vertices: Vec<Point> },
    Union(Vec<Shape>),
}

impl Shape {
    pub fn disk(center: Point, radius: f64) -> Self {
        Shape::Disk { center, radius }
    }

    pub fn polygon(vertices: Vec<Point>) -> Self {
        Shape::Polygon { vertices }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Shape::Polygon { vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]] }
    }

    /// Ellipse approximated by an inscribed convex polygon with `m` vertices.
    pub fn ellipse(center: Point, a: f64, b: f64, m: usize) -> Self {
        let vertices = (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                [center[0] + a * t.cos(), center[1] + b * t.sin()]
            })
            .collect();
        Shape::Polygon { vertices }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Disk { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidShape(format!(
                        "disk needs finite center and positive radius, got r={radius}"
                    )));
                }
                Ok(())
            }
            Shape::Polygon { vertices } => validate_convex(vertices).map(|_| ()),
            Shape::Union(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidShape("empty union".into()));
                }
                parts.iter().try_for_each(Shape::validate)
            }
        }
    }

    /// Signed distance (negative inside). Exact for single primitives,
    /// pointwise minimum over members for unions.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Disk { center, radius } => dist(p, *center) - radius,
            Shape::Polygon { vertices } => polygon_signed_distance(vertices, p),
            Shape::Union(parts) => {
                parts.iter().map(|s| s.signed_distance(p)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) < 0.0
    }

    /// `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            Shape::Disk { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            Shape::Polygon { vertices } => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    b[0] = b[0].min(v[0]);
                    b[1] = b[1].min(v[1]);
                    b[2] = b[2].max(v[0]);
                    b[3] = b[3].max(v[1]);
                }
                b
            }
            Shape::Union(parts) => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for s in parts {
                    let c = s.bounding_box();
                    b[0] = b[0].min(c[0]);
                    b[1] = b[1].min(c[1]);
                    b[2] = b[2].max(c[2]);
                    b[3] = b[3].max(c[3]);
                }
                b
            }
        }
    }

    /// Points on the boundary used to build convex hulls.
    pub(crate) fn boundary_samples(&self, out: &mut Vec<Point>) {
        match self {
            Shape::Disk { center, radius } => {
                let m = DISK_HULL_SAMPLES;
                out.extend((0..m).map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                }));
            }
            Shape::Polygon { vertices } => out.extend_from_slice(vertices),
            Shape::Union(parts) => parts.iter().for_each(|s| s.boundary_samples(out)),
        }
    }

    pub fn area(&self) -> Option<f64> {
        match self {
            Shape::Disk { radius, .. } => Some(std::f64::consts::PI * radius * radius),
            Shape::Polygon { vertices } => Some(polygon_area(vertices).abs()),
            Shape::Union(_) => None,
        }
    }
}

fn validate_convex(vertices: &[Point]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::InvalidShape("polygon needs at least 3 vertices".into()));
    }
    if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
        return Err(Error::InvalidShape("non-finite polygon vertex".into()));
    }
    let area = polygon_area(vertices);
    if area.abs() < 1e-14 {
        return Err(Error::InvalidShape("polygon has zero area".into()));
    }
    let s = area.signum();
    let n = vertices.len();
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let c = vertices[(k + 2) % n];
        if s * cross(sub(b, a), sub(c, b)) < -1e-12 * norm(sub(b, a)) * norm(sub(c, b)) {
            return Err(Error::InvalidShape("polygon is not convex".into()));
        }
    }
    Ok(area)
}

/// Signed shoelace area (positive for counterclockwise).
pub(crate) fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|k| cross(v[k], v[(k + 1) % n])).sum::<f64>()
}

pub(crate) fn polygon_perimeter(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|k| dist(v[k], v[(k + 1) % n])).sum()
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 { (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (dist(p, q), t)
}

fn point_in_polygon(v: &[Point], p: Point) -> bool {
    // even-odd crossing test; convexity is not required here
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_signed_distance(v: &[Point], p: Point) -> f64 {
    let n = v.len();
    let d = (0..n)
        .map(|k| segment_distance(p, v[k], v[(k + 1) % n]).0)
        .fold(f64::INFINITY, f64::min);
    if point_in_polygon(v, p) {
        -d
    } else {
        d
    }
}

/// Counterclockwise copy of a convex polygon.
pub(crate) fn ccw(vertices: &[Point]) -> Vec<Point> {
    let mut v = vertices.to_vec();
    if polygon_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

/// Area of a disk intersected with a convex polygon (any orientation).
pub(crate) fn disk_polygon_intersection_area(center: Point, r: f64, poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = sub(poly[k], center);
        let b = sub(poly[(k + 1) % n], center);
        total += disk_triangle_signed_area(a, b, r);
    }
    total.abs()
}

/// Signed area of `disk(0, r) ∩ triangle(0, a, b)`.
fn disk_triangle_signed_area(a: Point, b: Point, r: f64) -> f64 {
    let d = sub(b, a);
    let qa = dot(d, d);
    let mut ts = vec![0.0];
    if qa > 0.0 {
        let qb = 2.0 * dot(a, d);
        let qc = dot(a, a) - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut area = 0.0;
    for w in ts.windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let mid = [(p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5];
        if norm(mid) < r {
            area += 0.5 * cross(p, q);
        } else {
            area += 0.5 * r * r * cross(p, q).atan2(dot(p, q));
        }
    }
    area
}

/// Sutherland–Hodgman clip of `subject` by the convex counterclockwise `clip`.
pub(crate) fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for k in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % n];
        let side = |p: Point| cross(sub(b, a), sub(p, a));
        let input = std::mem::take(&mut out);
        let m = input.len();
        for i in 0..m {
            let p = input[i];
            let q = input[(i + 1) % m];
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

/// One piece of a piecewise-constant source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcePiece {
    pub shape: Shape,
    pub value: f64,
}

/// Piecewise-constant positive source `f = sum value_k * chi(shape_k)` and
/// the convex hull of its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pieces: Vec<SourcePiece>,
    hull: Vec<Point>,
}

impl SourceSpec {
    pub fn new(pieces: Vec<SourcePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidSource("no pieces".into()));
        }
        let mut samples = Vec::new();
        for p in &pieces {
            if !(p.value.is_finite() && p.value > 0.0) {
                return Err(Error::InvalidSource(format!("piece value must be > 0, got {}", p.value)));
            }
            match &p.shape {
                Shape::Union(_) => {
                    return Err(Error::InvalidSource("pieces must be disks or polygons".into()))
                }
                s => s.validate().map_err(|e| Error::InvalidSource(e.to_string()))?,
            }
            p.shape.boundary_samples(&mut samples);
        }
        let hull = convex_hull(&samples).map_err(|e| Error::InvalidSource(e.to_string()))?;
        Ok(Self { pieces, hull })
    }

    /// Single disk piece of constant value.
    pub fn disk(center: Point, radius: f64, value: f64) -> Result<Self> {
        Self::new(vec![SourcePiece { shape: Shape::disk(center, radius), value }])
    }

    pub fn pieces(&self) -> &[SourcePiece] {
        &self.pieces
    }

    /// Counterclockwise hull polygon of the support.
    pub fn hull(&self) -> &[Point] {
        &self.hull
    }

    pub fn hull_shape(&self) -> Shape {
        Shape::Polygon { vertices: self.hull.clone() }
    }

    pub fn hull_area(&self) -> f64 {
        polygon_area(&self.hull)
    }

    pub fn hull_perimeter(&self) -> f64 {
        polygon_perimeter(&self.hull)
    }

    /// Pointwise value by exact membership (overlapping pieces add).
    pub fn value_at(&self, p: Point) -> f64 {
        self.pieces.iter().filter(|pc| pc.shape.contains(p)).map(|pc| pc.value).sum()
    }

    /// Same source with every value multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| SourcePiece { shape: p.shape.clone(), value: p.value * s })
            .collect();
        Self::new(pieces)
    }

    /// `∫_{C_f} f`, computed from exact piece areas clipped to the hull.
    pub fn mass_in_hull(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let area = match &p.shape {
                    Shape::Disk { center, radius } => {
                        disk_polygon_intersection_area(*center, *radius, &self.hull)
                    }
                    Shape::Polygon { vertices } => {
                        polygon_area(&clip_convex(&ccw(vertices), &self.hull)).abs()
                    }
                    Shape::Union(_) => unreachable!("rejected in constructor"),
                };
                p.value * area
            })
            .sum()
    }

    /// `∫_{C_f} w f` for a weight `w`, by adaptive-free tensor Gauss quadrature
    /// on each piece clipped to the hull (used for test-function certificates).
    pub fn weighted_mass(&self, w: &dyn Fn(Point) -> f64) -> f64 {
        let mut total = 0.0;
        for p in &self.pieces {
            let poly = match &p.shape {
                Shape::Disk { center, radius } => {
                    let mut s = Vec::new();
                    Shape::disk(*center, *radius).boundary_samples(&mut s);
                    clip_convex(&s, &self.hull)
                }
                Shape::Polygon { vertices } => clip_convex(&ccw(vertices), &self.hull),
                Shape::Union(_) => unreachable!(),
            };
            total += p.value * polygon_integral(&poly, w);
        }
        total
    }
}

/// Integral of `w` over a convex polygon by fan triangulation with a
/// 7-point degree-5 triangle rule on a 4x4 subdivision of each fan triangle.
pub(crate) fn polygon_integral(poly: &[Point], w: &dyn Fn(Point) -> f64) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let c = {
        let n = poly.len() as f64;
        let s = poly.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    };
    let n = poly.len();
    let mut total = 0.0;
    for k in 0..n {
        total += triangle_integral(c, poly[k], poly[(k + 1) % n], w, 4);
    }
    total
}

fn triangle_integral(a: Point, b: Point, c: Point, w: &dyn Fn(Point) -> f64, sub_n: usize) -> f64 {
    // Dunavant degree-5 rule
    const R: [(f64, f64, f64); 7] = [
        (1.0 / 3.0, 1.0 / 3.0, 0.225),
        (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
        (0.470_142_064_105_115, 0.059_715_871_789_770, 0.132_394_152_788_506),
        (0.470_142_064_105_115, 0.470_142_064_105_115, 0.132_394_152_788_506),
        (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
        (0.101_286_507_323_456, 0.797_426_985_353_087, 0.125_939_180_544_827),
        (0.101_286_507_323_456, 0.101_286_507_323_456, 0.125_939_180_544_827),
    ];
    let area = 0.5 * cross(sub(b, a), sub(c, a)).abs();
    if area == 0.0 {
        return 0.0;
    }
    let m = sub_n as f64;
    let pt = |u: f64, v: f64| {
        [
            a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
            a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
        ]
    };
    let mut total = 0.0;
    for i in 0..sub_n {
        for j in 0..sub_n - i {
            let (u0, v0) = (i as f64 / m, j as f64 / m);
            // upright sub-triangle
            let tri = [(u0, v0), (u0 + 1.0 / m, v0), (u0, v0 + 1.0 / m)];
            total += sub_rule(&tri, &R, &pt, w);
            if i + j + 1 < sub_n {
                let tri = [(u0 + 1.0 / m, v0), (u0 + 1.0 / m, v0 + 1.0 / m), (u0, v0 + 1.0 / m)];
                total += sub_rule(&tri, &R, &pt, w);
            }
        }
    }
    total * area / (m * m)
}

fn sub_rule(
    tri: &[(f64, f64); 3],
    rule: &[(f64, f64, f64); 7],
    pt: &dyn Fn(f64, f64) -> Point,
    w: &dyn Fn(Point) -> f64,
) -> f64 {
    rule.iter()
        .map(|&(l1, l2, wt)| {
            let l0 = 1.0 - l1 - l2;
            let u = l0 * tri[0].0 + l1 * tri[1].0 + l2 * tri[2].0;
            let v = l0 * tri[0].1 + l1 * tri[1].1 + l2 * tri[2].1;
            wt * w(pt(u, v))
        })
        .sum()
}
