//! Solver-level properties: sign preservation, determinism, truncation and
//! first-cell insensitivity, grid persistence.

use std::sync::Arc;

use degenpara_core::coeff::{dh_model_field, heston_field};
use degenpara_core::expr::Expr;
use degenpara_core::func::{constant, smooth, Bump, SharedFn};
use degenpara_core::grid::{Grid, GridFunction, GridSpec, Spacing};
use degenpara_core::solver::{manufactured_problem, max_error, solve_cauchy, CauchyProblem, Scheme, TruncationBc};
use proptest::prelude::*;

fn spec(x: f64, y: f64, n_lat: usize, n_norm: usize, n_t: usize, spacing: Spacing) -> GridSpec {
    GridSpec {
        d: 2,
        t_max: 0.5,
        n_t,
        x_half_width: x,
        n_lateral: n_lat,
        y_max: y,
        n_normal: n_norm,
        spacing,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonpositive_data_gives_nonpositive_solution(
        nu in 0.1f64..3.0,
        kappa in 0.5f64..2.0,
        r in 0.0f64..0.2,
        heston in any::<bool>(),
        f0 in 0.0f64..1.0,
        g0 in 0.0f64..1.0,
        cx in -1.0f64..1.0,
        graded in any::<bool>(),
    ) {
        let field = if heston {
            heston_field(kappa, 0.5, 0.7, 0.0, r, 0.0).unwrap()
        } else {
            dh_model_field(nu, 2).unwrap()
        };
        let f = smooth(Expr::parse(&format!("-{f0} * exp(-(x1 - {cx})^2) * (1 + cos(t))")).unwrap(), 2);
        let g = smooth(Expr::parse(&format!("-{g0} * exp(-x2) * (1 + sin(x1))")).unwrap(), 2);
        let spacing = if graded { Spacing::Graded } else { Spacing::Uniform };
        let grid = Grid::new(spec(2.0, 2.0, 11, 11, 6, spacing)).unwrap();
        let pb = CauchyProblem::new(field, f, g, 0.5).unwrap();
        let (u, rep) = solve_cauchy(&pb, &grid, &Scheme::default()).unwrap();
        prop_assert!(rep.certificate.as_ref().is_some_and(|c| c.ok));
        let tol = 1e-9 * (1.0 + u.sup());
        prop_assert!(u.values.iter().all(|v| *v <= tol));
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let field = heston_field(1.0, 0.5, 0.8, 0.0, 0.05, 0.0).unwrap();
    let g = smooth(Expr::parse("exp(-x1^2) * (1 + x2)").unwrap(), 2);
    let grid = Grid::new(spec(2.0, 2.0, 21, 21, 10, Spacing::Graded)).unwrap();
    let pb = CauchyProblem::new(field, constant(0.1), g, 0.5).unwrap();
    let (a, _) = solve_cauchy(&pb, &grid, &Scheme::default()).unwrap();
    let (b, _) = solve_cauchy(&pb, &grid, &Scheme::default()).unwrap();
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
}

/// Declared bound on how much the inner half may move, for unit-size data.
const TRUNCATION_TOLERANCE: f64 = 5e-3;

#[test]
fn doubling_the_box_barely_moves_the_inner_solution() {
    let field = dh_model_field(1.0, 2).unwrap();
    // compactly supported in the inner half of the small box
    let g: SharedFn = Arc::new(Bump::new(vec![0.0, 0.0], 0.8, 4, Expr::Const(1.0)));
    let small = Grid::new(spec(2.0, 2.0, 33, 33, 10, Spacing::Uniform)).unwrap();
    let large = Grid::new(spec(4.0, 4.0, 65, 65, 10, Spacing::Uniform)).unwrap();
    let pb = CauchyProblem::new(field, constant(0.0), g, 0.5).unwrap();
    let (us, _) = solve_cauchy(&pb, &small, &Scheme::default()).unwrap();
    let (ul, _) = solve_cauchy(&pb, &large, &Scheme::default()).unwrap();
    // the two grids share every node of the small one
    let ns = small.n_space();
    let mut diff = 0.0f64;
    for m in 0..us.values.len() {
        let x = small.node(m % ns);
        if x[0].abs() <= 1.0 && x[1] <= 1.0 {
            let t = small.times[m / ns];
            diff = diff.max((us.values[m] - ul.interpolate(t, &x).unwrap()).abs());
        }
    }
    assert!(diff < TRUNCATION_TOLERANCE, "inner change {diff:e}");
}

#[test]
fn boundary_values_stable_under_first_cell_refinement() {
    let field = dh_model_field(1.0, 2).unwrap();
    let u_star = smooth(Expr::parse("exp(-t) * cos(x1) * (1 + sin(x2))").unwrap(), 2);
    let m = manufactured_problem(u_star.clone(), &field).unwrap();
    let boundary_values = |n_norm: usize| {
        let grid = Grid::new(spec(2.0, 2.0, 17, n_norm, 10, Spacing::Graded)).unwrap();
        let mut pb = CauchyProblem::new(field.clone(), m.source.clone(), m.initial.clone(), 0.5).unwrap();
        pb.truncation = TruncationBc::Exact(u_star.clone());
        let (u, _) = solve_cauchy(&pb, &grid, &Scheme::default()).unwrap();
        let err = max_error(&u, u_star.as_ref(), |_, x| x[0].abs() <= 1.5 && x[1] <= 1.5);
        let ns = grid.n_space();
        let last = grid.n_slices() - 1;
        let bvals: Vec<f64> = (0..ns)
            .filter(|&k| grid.is_boundary(k))
            .map(|k| u.at(last, k))
            .collect();
        (bvals, err)
    };
    let (coarse, err) = boundary_values(17);
    let (fine, _) = boundary_values(33);
    let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(change < err.max(1e-12), "boundary change {change:e} vs error {err:e}");
}

#[test]
fn grid_dump_round_trip_is_bitwise() {
    let grid = Grid::new(spec(1.0, 1.0, 5, 6, 3, Spacing::Graded)).unwrap();
    let f = smooth(Expr::parse("sin(x1 + 3*x2) * exp(t) / 7").unwrap(), 2);
    let u = GridFunction::from_fn(grid.clone(), f.as_ref());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.dgph");
    u.save(&path).unwrap();
    let back = GridFunction::load(&path, grid).unwrap();
    assert!(u
        .values
        .iter()
        .zip(&back.values)
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}
