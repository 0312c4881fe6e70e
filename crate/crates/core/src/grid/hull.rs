use super::{cross, sub, Point};
use crate::{Error, Result};

/// Convex hull by Andrew's monotone chain.
///
/// Returns the hull counterclockwise, starting from the lowest-leftmost
/// point, with collinear boundary points removed.
pub fn convex_hull(points: &[Point]) -> Result<Vec<Point>> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 points, got {}", points.len())));
    }
    let mut pts: Vec<Point> = points.to_vec();
    if pts.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Degenerate("non-finite point".into()));
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();

    let turn = |o: Point, a: Point, b: Point| cross(sub(a, o), sub(b, o));
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::Degenerate("points are collinear".into()));
    }
    Ok(lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::shapes::polygon_area;
    use std::f64::consts::PI;

    #[test]
    fn square_with_interior_points() {
        let pts = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.5],
            [1.0, 1.0],
            [0.2, 0.7],
            [0.0, 1.0],
            [0.5, 0.0], // collinear on an edge
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(polygon_area(&h) > 0.0);
    }

    #[test]
    fn sampled_circle_area() {
        let m = 512;
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), m);
        // inscribed regular m-gon: (m/2) sin(2π/m), deficit ~ 2π³/(3m²)
        let area = polygon_area(&h);
        let exact = 0.5 * m as f64 * (2.0 * PI / m as f64).sin();
        assert!((area - exact).abs() < 1e-12);
        assert!((PI - area) < 2.0 * PI.powi(3) / (3.0 * (m * m) as f64) * 1.01);
    }

    #[test]
    fn collinear_input_is_rejected() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(convex_hull(&pts), Err(Error::Degenerate(_))));
        assert!(convex_hull(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
    }
}
