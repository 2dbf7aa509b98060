//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Lines are written straight to stderr so they appear in the test log even
//! when output capture is on.

use std::io::Write;
use std::sync::Arc;

use degenpara_core::coeff::{dh_model_field, heston_field, CoefficientField};
use degenpara_core::expr::Expr;
use degenpara_core::func::{constant, smooth, Bump, SharedFn, SmoothFn};
use degenpara_core::grid::{Grid, GridFunction, GridSpec, Spacing};
use degenpara_core::holder::{PairBudget, PointSet};
use degenpara_core::metric::{
    cycloidal, cycloidal_distance, parabolic, slab_equivalence_constants, slab_ratio_envelope, PairMode, PairSampler,
    SpaceTimePoint,
};
use degenpara_core::reduction::{map_grid_function, model_box, reduce, Direction};
use degenpara_core::solver::{
    convergence_study, exact_solution, manufactured_problem, max_error, solve_cauchy, CauchyProblem, Scheme,
    TruncationBc,
};
use degenpara_core::verify::barrier::{barrier_residual, Barrier};
use degenpara_core::verify::boundary::{boundary_vanishing_check, layer_profile};
use degenpara_core::verify::interp::{homogeneity, interpolation_check};
use degenpara_core::verify::maxprin::{
    check_sup_bound, check_weighted_bound, comparison_check, growth_constants, Supersolution,
};
use degenpara_core::verify::schauder::{ratio_stability, schauder_ratio, AuditLattice};
use degenpara_core::verify::{Verdict, AUDIT_MARGIN};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, ok: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {criterion:>2}: {} {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn spec(n_lat: usize, n_norm: usize, n_t: usize, t_max: f64, spacing: Spacing) -> GridSpec {
    GridSpec {
        d: 2,
        t_max,
        n_t,
        x_half_width: 2.0,
        n_lateral: n_lat,
        y_max: 2.0,
        n_normal: n_norm,
        spacing,
    }
}

fn expr(text: &str) -> Expr {
    Expr::parse(text).unwrap()
}

fn shared(text: &str) -> SharedFn {
    smooth(expr(text), 2)
}

/// Random ρ = 0 Heston field with `c = -r <= 0`.
fn random_heston(rng: &mut ChaCha8Rng) -> CoefficientField {
    heston_field(
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.2..1.0),
        rng.gen_range(0.3..1.0),
        0.0,
        rng.gen_range(0.0..0.1),
        rng.gen_range(0.0..0.05),
    )
    .unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, k: usize) -> CoefficientField {
    if k % 2 == 0 {
        dh_model_field(rng.gen_range(0.25..2.0), 2).unwrap()
    } else {
        random_heston(rng)
    }
}

/// Smooth bounded data `scale * (a + b exp(-(x1-c)^2 - (x2-e)^2) + s sin(w x1) cos(t))`.
fn random_data(rng: &mut ChaCha8Rng, sign: Option<f64>) -> String {
    let a: f64 = rng.gen_range(0.0..0.5);
    let b: f64 = rng.gen_range(0.1..1.0);
    let c: f64 = rng.gen_range(-1.0..1.0);
    let e: f64 = rng.gen_range(0.0..1.5);
    match sign {
        // one-signed: a + b * bump + s * (1 + sin(...)) with all weights >= 0
        Some(s) => {
            let w: f64 = rng.gen_range(0.5..2.0);
            let amp: f64 = rng.gen_range(0.0..0.3);
            format!("{s} * ({a} + {b} * exp(-(x1 - {c})^2 - (x2 - {e})^2) + {amp} * (1 + sin({w} * x1)))")
        }
        None => {
            let w: f64 = rng.gen_range(0.5..2.0);
            let amp: f64 = rng.gen_range(-0.5..0.5);
            format!("{a} - {b} * exp(-(x1 - {c})^2 - (x2 - {e})^2) + {amp} * sin({w} * x1) * cos(t)")
        }
    }
}

#[test]
fn criterion_01_metric_suite() {
    let p = |t: f64, x: &[f64]| SpaceTimePoint::new(t, x.to_vec()).unwrap();
    let s1 = cycloidal_distance(&p(0.0, &[0.0, 1.0]), &p(0.0, &[0.0, 4.0])).unwrap();
    let s2 = cycloidal_distance(&p(0.0, &[0.0, 0.0]), &p(0.0, &[3.0, 0.0])).unwrap();
    let s3 = cycloidal_distance(&p(0.0, &[0.3, 1.7]), &p(9.0, &[0.3, 1.7])).unwrap();
    let worked = (s1 - 1.0).abs() <= 1e-12 && (s2 - 3f64.sqrt()).abs() <= 1e-12 && (s3 - 3.0).abs() <= 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut axioms = true;
    for _ in 0..10_000 {
        let a: Vec<f64> = vec![rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let b: Vec<f64> = if rng.gen_bool(0.1) {
            a.clone()
        } else {
            vec![rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)]
        };
        let (ta, tb) = (
            rng.gen_range(0.0..2.0),
            if rng.gen_bool(0.5) {
                0.5
            } else {
                rng.gen_range(0.0..2.0)
            },
        );
        let s_ab = cycloidal(ta, &a, tb, &b);
        let s_ba = cycloidal(tb, &b, ta, &a);
        let same = ta == tb && a == b;
        axioms &= s_ab == s_ba && cycloidal(ta, &a, ta, &a) == 0.0 && (same || s_ab > 0.0);
        axioms &= parabolic(ta, &a, tb, &b) == parabolic(tb, &b, ta, &a);
    }

    let half_width = 2.0;
    let sampler = PairSampler {
        d: 2,
        t_max: 1.0,
        half_width,
        mode: PairMode::Uniform,
        count: 100_000,
        seed: 7,
    };
    let (lower, upper) = slab_ratio_envelope(1.0, 4.0, 2.0 * half_width);
    let pairs = sampler.sample(1.0, 4.0);
    let mut slab_ok = pairs.len() == 100_000;
    for k in 0..pairs.len() {
        let (t1, x1, t2, x2) = pairs.pair(k);
        let (s, r) = (cycloidal(t1, x1, t2, x2), parabolic(t1, x1, t2, x2));
        slab_ok &= lower * r <= s * (1.0 + 1e-14) && s <= upper * r * (1.0 + 1e-14);
    }
    let (emp_lo, emp_hi) = slab_equivalence_constants(1.0, 4.0, &sampler).unwrap();
    slab_ok &= emp_lo >= lower && emp_hi <= upper && emp_lo > 0.0;

    let ok = worked && axioms && slab_ok;
    report(
        1,
        ok,
        &format!("worked values exact, axioms on 1e4 pairs, slab [1,4]: {lower:.4} <= s/rho <= {upper:.4} on 1e5 pairs (empirical {emp_lo:.4}..{emp_hi:.4})"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_discrete_comparison() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scheme = Scheme::default();
    let mut passed = 0;
    let total = 50;
    for k in 0..total {
        let field = random_field(&mut rng, k);
        let spacing = if k % 3 == 0 { Spacing::Uniform } else { Spacing::Graded };
        let grid = Grid::new(spec(13, 13, 8, 0.5, spacing)).unwrap();

        // nonpositive data
        let f = shared(&random_data(&mut rng, Some(-1.0)));
        let g = shared(&random_data(&mut rng, Some(-1.0)));
        let pb = CauchyProblem::new(field.clone(), f, g, 0.5).unwrap();
        let (u, rep) = solve_cauchy(&pb, &grid, &scheme).unwrap();
        let scale = 1.0 + u.sup();
        let sign_ok = rep.certificate.as_ref().is_some_and(|c| c.ok) && u.values.iter().all(|v| *v <= 1e-9 * scale);

        // |Lu| <= L v1 with v1 = t F + G, K = 0 since c <= 0
        let f = shared(&random_data(&mut rng, None));
        let g = shared(&random_data(&mut rng, None));
        let pb = CauchyProblem::new(field.clone(), f.clone(), g.clone(), 0.5).unwrap();
        let (u, _) = solve_cauchy(&pb, &grid, &scheme).unwrap();
        let fu = GridFunction::from_fn(grid.clone(), f.as_ref());
        let gu = GridFunction::from_fn(grid.clone(), g.as_ref());
        let f_sup = fu.sup();
        let g_sup = gu.slice(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let v1 = Supersolution::v1(2, 0.0, f_sup, g_sup);
        let vg = GridFunction::from_fn(grid.clone(), &v1);
        let mut neg = u.clone();
        neg.values.iter_mut().for_each(|v| *v = -*v);
        let tol = 1e-8 * (1.0 + f_sup + g_sup);
        let upper = comparison_check(&field, &u, &vg, tol).unwrap();
        let lower = comparison_check(&field, &neg, &vg, tol).unwrap();
        let cmp_ok = upper.verdict == Verdict::Pass && lower.verdict == Verdict::Pass;
        if sign_ok && cmp_ok {
            passed += 1;
        }
    }
    let ok = passed == total;
    report(
        2,
        ok,
        &format!("{passed}/{total} certified problems: sign preserved and |u| <= v1"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_sup_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let scheme = Scheme::default();
    let t_max = 0.5;
    let mut passed = 0;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let field = match k % 3 {
            0 => dh_model_field(rng.gen_range(0.25..2.0), 2).unwrap(),
            1 => random_heston(&mut rng),
            _ => {
                // constant field with c > 0
                let s = rng.gen_range(0.3..1.0);
                let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5 * s * s]);
                let b = DVector::from_vec(vec![rng.gen_range(-0.5..0.5), rng.gen_range(0.2..1.0)]);
                CoefficientField::constant(&a, &b, rng.gen_range(0.0..0.5), 0.5).unwrap()
            }
        };
        let grid = Grid::new(spec(13, 13, 10, t_max, Spacing::Graded)).unwrap();
        let f = shared(&random_data(&mut rng, None));
        let g = shared(&random_data(&mut rng, None));
        let pb = CauchyProblem::new(field.clone(), f.clone(), g.clone(), t_max).unwrap();
        let (u, _) = solve_cauchy(&pb, &grid, &scheme).unwrap();
        let kc = growth_constants(&field, &grid);
        let row = check_sup_bound(&u, f.as_ref(), g.as_ref(), kc.k_sup(), t_max, AUDIT_MARGIN, 1.02).unwrap();
        worst = worst.max(row.lhs / row.rhs);
        if row.passed() {
            passed += 1;
        }
    }
    // equality case
    let grid = Grid::new(spec(13, 13, 10, 1.0, Spacing::Graded)).unwrap();
    let pb = CauchyProblem::new(dh_model_field(1.0, 2).unwrap(), constant(0.0), constant(1.0), 1.0).unwrap();
    let (u, _) = solve_cauchy(&pb, &grid, &scheme).unwrap();
    let eq = check_sup_bound(
        &u,
        constant(0.0).as_ref(),
        constant(1.0).as_ref(),
        0.0,
        1.0,
        AUDIT_MARGIN,
        1.02,
    )
    .unwrap();
    let eq_ratio = eq.lhs / eq.rhs;
    let ok = passed == 20 && (eq_ratio - 1.0).abs() <= 1e-8;
    report(
        3,
        ok,
        &format!("{passed}/20 randomized (worst lhs/rhs {worst:.4}); equality case ratio {eq_ratio:.12}"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_weighted_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let scheme = Scheme::default();
    let t_max = 0.5;
    let mut passed = 0;
    let mut total = 0;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let field = random_field(&mut rng, k);
        let grid = Grid::new(spec(13, 13, 10, t_max, Spacing::Graded)).unwrap();
        let f = shared(&random_data(&mut rng, None));
        let g = shared(&random_data(&mut rng, None));
        let pb = CauchyProblem::new(field.clone(), f.clone(), g.clone(), t_max).unwrap();
        let (u, _) = solve_cauchy(&pb, &grid, &scheme).unwrap();
        let kw = growth_constants(&field, &grid).k_weighted();
        for q in [1.0, 2.0] {
            let row = check_weighted_bound(&u, f.as_ref(), g.as_ref(), kw, q, t_max, AUDIT_MARGIN, 1.05).unwrap();
            worst = worst.max(row.lhs / row.rhs);
            total += 1;
            if row.passed() {
                passed += 1;
            }
        }
    }
    let ok = passed == total;
    report(
        4,
        ok,
        &format!("{passed}/{total} (20 problems x q in {{1,2}}), worst lhs/rhs {worst:.4}"),
    );
    assert!(ok);
}

fn order_study(field: &CoefficientField) -> (f64, f64) {
    let scheme = Scheme::default();
    // spatial: time-affine solution, fixed dt, refined h
    let u_space = smooth(exact_solution("affine-time-sine", 2).unwrap(), 2);
    let ladder: Vec<GridSpec> = [9, 17, 33]
        .iter()
        .map(|&n| spec(n, n, 4, 0.5, Spacing::Uniform))
        .collect();
    let space = convergence_study(field, u_space, &ladder, &scheme, AUDIT_MARGIN).unwrap();
    // temporal: spatially exact solution, fixed h, refined dt
    let u_time = smooth(exact_solution("exp-linear", 2).unwrap(), 2);
    let ladder: Vec<GridSpec> = [4, 8, 16]
        .iter()
        .map(|&n| spec(9, 9, n, 1.0, Spacing::Uniform))
        .collect();
    let time = convergence_study(field, u_time, &ladder, &scheme, AUDIT_MARGIN).unwrap();
    (space.order_h.unwrap_or(f64::NAN), time.order_dt.unwrap_or(f64::NAN))
}

#[test]
fn criterion_05_manufactured_convergence() {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, field) in [
        ("dh", dh_model_field(1.0, 2).unwrap()),
        ("heston", heston_field(1.5, 0.5, 0.6, 0.0, 0.05, 0.01).unwrap()),
    ] {
        let (oh, ot) = order_study(&field);
        ok &= oh >= 0.9 && (ot - 1.0).abs() <= 0.3;
        details.push(format!("{name}: space {oh:.3}, time {ot:.3}"));
    }
    report(5, ok, &details.join("; "));
    assert!(ok);
}

fn constant_field(sigma: f64, rho: f64, b: [f64; 2], c: f64) -> (CoefficientField, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.5 * rho * sigma, 0.5 * rho * sigma, 0.5 * sigma * sigma]);
    (
        CoefficientField::constant(&a, &DVector::from_vec(b.to_vec()), c, 0.5).unwrap(),
        a,
    )
}

#[test]
fn criterion_06_reduction_round_trip() {
    let (field, a) = constant_field(0.8, 0.4, [0.05, 0.6], -0.05);
    let plan = Arc::new(reduce(&field).unwrap());
    let cert = plan.certificate(&a, 1e-12);
    let b_bar_d_ok = (plan.b_bar[1] - 0.6 / a[(1, 1)]).abs() <= 1e-12;

    let u_star = shared("exp(-t) * cos(x1) * (1 + sin(x2))");
    let m = manufactured_problem(u_star.clone(), &field).unwrap();
    let t_max = 0.5;
    let direct_spec = spec(33, 33, 20, t_max, Spacing::Uniform);
    let grid = Grid::new(direct_spec.clone()).unwrap();
    let mut pb = CauchyProblem::new(field.clone(), m.source.clone(), m.initial.clone(), t_max).unwrap();
    pb.truncation = TruncationBc::Exact(u_star.clone());
    // the cross term breaks the M-matrix property, so the direct run is uncertified
    let uncertified = Scheme {
        certify: false,
        ..Scheme::default()
    };
    let (u, _) = solve_cauchy(&pb, &grid, &uncertified).unwrap();

    let (z, y) = model_box(&plan, direct_spec.x_half_width, direct_spec.y_max);
    let model_spec = GridSpec {
        t_max: plan.forward_time(t_max),
        x_half_width: z,
        y_max: y,
        ..direct_spec.clone()
    };
    let model_grid = Grid::new(model_spec).unwrap();
    let model_pb = plan.transform_problem(&pb).unwrap();
    let (w, _) = solve_cauchy(&model_pb, &model_grid, &Scheme::default()).unwrap();
    let w_star = plan.to_model(u_star.clone());

    let inner = |g: &GridSpec| {
        let (xw, yw) = (g.x_half_width * (1.0 - AUDIT_MARGIN), g.y_max * (1.0 - AUDIT_MARGIN));
        move |_: f64, x: &[f64]| x[0].abs() <= xw && x[1] <= yw
    };
    let e_direct = max_error(&u, u_star.as_ref(), inner(&direct_spec));
    let e_model = max_error(&w, &w_star, inner(&model_grid.spec));
    let back = map_grid_function(&plan, &w, &grid, Direction::Backward).unwrap();
    let keep = inner(&direct_spec);
    let ns = grid.n_space();
    let mut discrepancy = 0.0f64;
    for (m_idx, (a_v, b_v)) in u.values.iter().zip(&back.values).enumerate() {
        if keep(grid.times[m_idx / ns], &grid.node(m_idx % ns)) {
            discrepancy = discrepancy.max((a_v - b_v).abs());
        }
    }
    let budget = 3.0 * e_direct.max(e_model);
    let ok = cert.ok && b_bar_d_ok && discrepancy <= budget;
    report(
        6,
        ok,
        &format!(
            "discrepancy {discrepancy:.3e} <= 3 x {:.3e}; cross {:.1e}, unit {:.1e}, b_bar_d = b_d/a_dd to {:.1e} (literal sqrt(a_dd) b_d form: see ignored test)",
            e_direct.max(e_model),
            cert.cross_terms,
            cert.unit_diffusion,
            (plan.b_bar[1] - 0.6 / a[(1, 1)]).abs()
        ),
    );
    assert!(ok);
}

/// The normal drift of the model form equals `sqrt(a_dd) b_d` only when
/// `a_dd = 1`. The ratio `b_d / a_dd` is invariant under every rescaling
/// of `x_d` and `t` that normalises the diffusion, so this cannot hold for
/// `a_dd != 1`.
#[test]
#[ignore = "identity b_bar_d = sqrt(a_dd) b_d is false when a_dd != 1"]
fn criterion_06_literal_b_bar_identity() {
    let (field, a) = constant_field(0.8, 0.4, [0.05, 0.6], -0.05);
    let plan = reduce(&field).unwrap();
    let literal = a[(1, 1)].sqrt() * 0.6;
    let gap = (plan.b_bar[1] - literal).abs();
    report(
        6,
        gap <= 1e-12,
        &format!("literal b_bar_d identity: |{} - {literal}| = {gap:.3e}", plan.b_bar[1]),
    );
    assert!(gap <= 1e-12);
}

#[test]
fn criterion_07_barriers() {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut n_total = 0;
    for nu in [0.5, 1.0, 2.0] {
        for bi in [-2.0, 0.0, 2.0] {
            let field =
                CoefficientField::constant(&DMatrix::identity(2, 2), &DVector::from_vec(vec![bi, nu]), 0.0, 0.5)
                    .unwrap();
            let br = Barrier::for_field(&field, 0, 0.5, 0.0).unwrap();
            ok &= br.b == bi.abs() + 1.0 && (br.delta - 0.9 * 0.5 / br.b).abs() < 1e-15;
            let pts = br.sample_window(1000, 4.0, 2.0, 11);
            let r = barrier_residual(&br, &field, &pts).unwrap();
            n_total += r.n_points;
            worst = worst.min(r.min);
            ok &= r.passed() && r.n_points >= 1000;
        }
    }
    report(
        7,
        ok,
        &format!("min residual {worst:.4e} over {n_total} window samples (9 barriers)"),
    );
    assert!(ok);
}

fn interp_functions() -> Vec<Bump> {
    vec![
        Bump::new(vec![0.0, 0.0], 1.0, 3, expr("1")),
        Bump::new(vec![0.2, 0.0], 0.8, 4, expr("1 + t")),
        Bump::new(vec![-0.3, 0.0], 0.9, 3, expr("cos(t)")),
        Bump::new(vec![0.0, 0.0], 0.6, 5, expr("exp(-t)")),
        Bump::new(vec![0.4, 0.0], 0.7, 3, expr("1 + t^2")),
    ]
}

fn interp_points() -> PointSet {
    let times = [0.0, 0.25, 0.5];
    let xs: Vec<f64> = (0..15).map(|k| -1.0 + 2.0 * k as f64 / 14.0).collect();
    let ys: Vec<f64> = (0..10).map(|k| (k as f64 / 9.0).powi(2)).collect();
    PointSet::lattice(&times, &[xs, ys])
}

#[test]
fn criterion_08_interpolation_fits() {
    let funcs = interp_functions();
    let refs: Vec<&dyn SmoothFn> = funcs.iter().map(|f| f as &dyn SmoothFn).collect();
    let pts = interp_points();
    let eps = [0.5, 0.25, 0.1];
    let budget = PairBudget {
        exhaustive_cap: 1 << 20,
        ..PairBudget::default()
    };
    let fits = interpolation_check(&refs, &pts, 0.5, &eps, &budget).unwrap();
    let mut ok = fits.len() == 4;
    let mut details = Vec::new();
    for f in &fits {
        let all_hold = f.instances.len() == 15 && f.instances.iter().all(|i| f.holds(i, 1e-12));
        ok &= f.feasible && f.c >= 0.0 && f.m >= 0.0 && all_hold;
        details.push(format!("{}: C={:.3e} m={}", f.inequality, f.c, f.m));
    }
    let homog = homogeneity(&refs, &pts, 0.5, &eps, &budget, 1e-12).unwrap();
    ok &= homog;
    report(
        8,
        ok,
        &format!(
            "{}; homogeneity {}",
            details.join(", "),
            if homog { "ok" } else { "broken" }
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_boundary_vanishing() {
    let field = heston_field(1.5, 0.5, 0.6, -0.5, 0.05, 0.0).unwrap();
    let g = shared("exp(-x1^2) * (1 + 0.5 * sin(x2))");
    // correlated run, empirical only: the cross stencil is not monotone
    let uncertified = Scheme {
        certify: false,
        ..Scheme::default()
    };
    let mut profiles = Vec::new();
    for (n, n_t) in [(9, 8), (17, 16), (33, 32)] {
        let grid = Grid::new(spec(n, n, n_t, 0.5, Spacing::Graded)).unwrap();
        let pb = CauchyProblem::new(field.clone(), constant(0.0), g.clone(), 0.5).unwrap();
        let (u, _) = solve_cauchy(&pb, &grid, &uncertified).unwrap();
        profiles.push(layer_profile(&u, 3, AUDIT_MARGIN).unwrap());
    }
    let rows = boundary_vanishing_check(&profiles).unwrap();
    let ok = rows.iter().all(|r| r.passed());
    let firsts: Vec<String> = profiles
        .iter()
        .map(|p| format!("{:.3e}@{:.3e}", p.maxima[0], p.heights[0]))
        .collect();
    report(9, ok, &format!("first-layer max |x_d D2u|: {}", firsts.join(" -> ")));
    assert!(ok);
}

#[test]
fn criterion_10_schauder_ratio() {
    let field = dh_model_field(1.0, 2).unwrap();
    let f = shared("0.5 * cos(x1) * exp(-x2)");
    let g = shared("exp(-x1^2) / (1 + x2)");
    let budget = PairBudget {
        exhaustive_cap: 1 << 20,
        ..PairBudget::default()
    };
    let mut ratios = Vec::new();
    let mut norms = Vec::new();
    for (n, n_t) in [(17, 10), (33, 20), (65, 40)] {
        let grid = Grid::new(spec(n, n, n_t, 0.5, Spacing::Graded)).unwrap();
        let pb = CauchyProblem::new(field.clone(), f.clone(), g.clone(), 0.5).unwrap();
        let (u, _) = solve_cauchy(&pb, &grid, &Scheme::default()).unwrap();
        let rep = schauder_ratio(&u, f.as_ref(), g.as_ref(), 0.5, 1.0, &AuditLattice::default(), &budget).unwrap();
        norms.push(format!(
            "n={n}: |u|={:.4} |f|={:.4} |g|={:.4} ratio={:.4}",
            rep.solution.total, rep.source.total, rep.initial.total, rep.ratio
        ));
        ratios.push(rep.ratio);
    }
    let row = ratio_stability(&ratios, 0.25).unwrap();
    report(
        10,
        row.passed(),
        &format!("variation {:.3} <= 0.25; {}", row.lhs, norms.join("; ")),
    );
    assert!(row.passed());
}
