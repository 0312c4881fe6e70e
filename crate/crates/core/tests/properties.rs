use proptest::prelude::*;

use quadsurf::certificates::{means_chain, polygon_boundary_integral};
use quadsurf::grid::{extract_boundary, signed_distance, volume_integral, Grid, Integrand, LevelSet, Shape, SourceSpec};
use quadsurf::pde::{solve_poisson, Rhs};
use quadsurf::shapeopt::{initial_level_set, DescentParams, Descent, GSpec, Init, Problem};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

/// Convex polygon with jittered vertices around a circle.
fn convex_polygon() -> impl Strategy<Value = Shape> {
    (3usize..9)
        .prop_flat_map(|n| (prop::collection::vec(-0.25..0.25f64, n), 0.5..0.9f64, -0.2..0.2f64, -0.2..0.2f64))
        .prop_map(|(jitter, r, cx, cy)| {
            let n = jitter.len() as f64;
            let step = std::f64::consts::TAU / n;
            let pts = jitter
                .iter()
                .enumerate()
                .map(|(k, j)| {
                    let t = (k as f64 + j) * step;
                    [cx + r * t.cos(), cy + r * t.sin()]
                })
                .collect();
            Shape::polygon(pts)
        })
}

fn domain() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.3..0.9f64, -0.2..0.2f64, -0.2..0.2f64).prop_map(|(r, x, y)| Shape::disk([x, y], r)),
        (0.4..0.9f64, 0.3..0.9f64).prop_map(|(a, b)| Shape::ellipse([0.0, 0.0], a, b, 64)),
        convex_polygon(),
    ]
}

fn positive_g() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01..5.0f64, -2.0..2.0f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn means_are_ordered(values in prop::collection::vec(1e-3..1e3f64, 1..12)) {
        let m = means_chain(&values).unwrap();
        prop_assert!(m.ordered);
        let a = m.as_array();
        for w in a.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn discrete_cauchy_schwarz(poly in convex_polygon(), (k, ax, ay) in positive_g()) {
        let g = |p: [f64; 2]| k * (1.0 + 0.5 * (ax * p[0] + ay * p[1]).sin().powi(2));
        let Shape::Polygon { vertices } = &poly else { unreachable!() };
        let s = polygon_boundary_integral(vertices, |p| g(p).sqrt());
        let lhs = s * s;
        let rhs = polygon_boundary_integral(vertices, g) * polygon_boundary_integral(vertices, |_| 1.0);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn trace_cauchy_schwarz(r in 0.3..0.9f64, (k, ax, ay) in positive_g()) {
        let grid = Grid::centered(1.5, 32).unwrap();
        let ls = signed_distance(&Shape::ellipse([0.0, 0.0], r, 0.8 * r, 48), grid).unwrap();
        let t = extract_boundary(&ls).unwrap();
        let g = |p: [f64; 2]| k * (1.0 + (ax * p[0] - ay * p[1]).cos().powi(2));
        let s = t.integrate_fn(|p| g(p).sqrt());
        prop_assert!(s * s <= t.integrate_fn(g) * t.perimeter() * (1.0 + 1e-12));
    }

    #[test]
    fn maximum_principle_and_f_monotonicity(shape in domain(), c in 0.1..10.0f64, bump in 0.0..5.0f64) {
        let grid = Grid::centered(2.0, 32).unwrap();
        let ls = signed_distance(&shape, grid).unwrap();
        let f1 = quadsurf::grid::ScalarField::from_fn(grid, |p| c * (1.0 + p[0] * p[0]));
        let f2 = f1.zip_with(&quadsurf::grid::ScalarField::from_fn(grid, |p| bump * p[1].abs()), |a, b| a + b);
        let u1 = solve_poisson(&ls, Rhs::Field(&f1)).unwrap();
        let u2 = solve_poisson(&ls, Rhs::Field(&f2)).unwrap();
        let scale = u2.u.max().max(1e-300);
        for (a, b) in u1.u.values.iter().zip(&u2.u.values) {
            prop_assert!(*a >= -1e-9 * scale);
            prop_assert!(*a <= *b + 1e-9 * scale);
        }
    }
}

fn descent_case(radius: f64, c: f64, k: f64, bilap: bool) -> Result<(), TestCaseError> {
    let grid = Grid::centered(2.0, 32).unwrap();
    let f = SourceSpec::disk([0.05, -0.03], radius, c).unwrap();
    let g = GSpec::constant(k);
    let params = DescentParams { max_iters: 6, reinit_every: 2, ..DescentParams::default() };
    let problem = if bilap { Problem::Bilap { g_squared: false } } else { Problem::Qs };
    let d = Descent::new(problem, &f, &g, params, grid).unwrap();
    let hull = d.hull().clone();
    let init = initial_level_set(&f, &Init::default(), grid).unwrap();
    let mut leaks = Vec::new();
    let report = d
        .run(&init, |_, ls: &LevelSet, _| {
            let outside = LevelSet {
                grid,
                phi: ls.phi.iter().zip(&hull.phi).map(|(p, q)| q.max(-p)).collect(),
            };
            leaks.push(volume_integral(&outside, Integrand::Const(1.0)));
        })
        .unwrap();
    prop_assert!(report.error.is_none(), "{:?}", report.error);
    prop_assert!(leaks.iter().all(|&v| v == 0.0), "{leaks:?}");
    for w in report.history.j.windows(2) {
        prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn descent_decreases_j_and_keeps_hull(radius in 0.2..0.45f64, c in 1.0..8.0f64, k in 0.05..1.5f64) {
        descent_case(radius, c, k, false)?;
    }

    #[test]
    fn bilap_descent_decreases_j_and_keeps_hull(radius in 0.2..0.45f64, c in 1.0..8.0f64, k in 0.002..0.1f64) {
        descent_case(radius, c, k, true)?;
    }
}
