//! One runner per experiment kind. Each writes only into its own directory.

use degenpara_core::coeff::{validate_assumptions, CoefficientField, Sampling};
use degenpara_core::expr::Expr;
use degenpara_core::func::{Bump, SmoothFn, SpaceTimeFn};
use degenpara_core::grid::{Grid, GridFunction, GridSpec};
use degenpara_core::holder::{
    weighted_norm, FieldSamples, HolderReport, Order, PairBudget, PointSet, SecondOrderForm, WeightedNorm,
};
use degenpara_core::io::fmt_f64;
use degenpara_core::reduction::reduce;
use degenpara_core::solver::{convergence_study, solve_cauchy, SolveReport, MACHINE_LEVEL_ERROR};
use degenpara_core::verify::barrier::{barrier_residual, Barrier};
use degenpara_core::verify::interp::{homogeneity, interpolation_check};
use degenpara_core::verify::maxprin::{
    check_sup_bound, check_weighted_bound, comparison_check, growth_constants, supersolution_margin, Supersolution,
};
use degenpara_core::verify::schauder::{ratio_stability, schauder_ratio, AuditLattice};
use degenpara_core::verify::{Verdict, AUDIT_MARGIN};
use degenpara_core::CheckRow;
use nalgebra::{DMatrix, DVector};

use crate::config::{ExperimentConfig, Kind};
use crate::error::Result;
use crate::report::KindDir;

/// Tolerance for the certificate residuals of a reduction plan.
const PLAN_TOLERANCE: f64 = 1e-12;
/// Largest supersolution deficit attributed to rounding.
const MARGIN_TOLERANCE: f64 = 1e-9;

fn budget(cfg: &ExperimentConfig) -> PairBudget {
    PairBudget {
        exhaustive_cap: 1 << 20,
        samples: cfg.checks.pair_samples,
        seed: cfg.seed,
    }
}

fn with_verdict(mut row: CheckRow, ok: bool) -> CheckRow {
    row.verdict = Verdict::from_bool(ok);
    row
}

pub fn run_kind(kind: Kind, cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    match kind {
        Kind::Solve => solve(cfg, dir),
        Kind::ValidateCoeffs => validate_coeffs(cfg, dir),
        Kind::Norms => norms(cfg, dir),
        Kind::VerifyMaxprin => verify_maxprin(cfg, dir),
        Kind::VerifyBarriers => verify_barriers(cfg, dir),
        Kind::VerifyInterp => verify_interp(cfg, dir),
        Kind::VerifySchauder => verify_schauder(cfg, dir),
        Kind::Reduce => reduce_kind(cfg, dir),
        Kind::Convergence => convergence(cfg, dir),
    }
}

fn solve_base(cfg: &ExperimentConfig) -> Result<(GridFunction, SolveReport)> {
    let grid = cfg.grid()?;
    Ok(solve_cauchy(&cfg.problem()?, &grid, &cfg.scheme())?)
}

fn dump(cfg: &ExperimentConfig, dir: &mut KindDir, name: &str, u: &GridFunction) -> Result<()> {
    if cfg.checks.write_grids {
        let p = dir.file_path(name);
        u.save(&p)?;
    }
    Ok(())
}

fn solve(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let (u, rep) = solve_base(cfg)?;
    dump(cfg, dir, "u.dgph", &u)?;
    dir.write_text("solve.csv", &rep.to_csv())?;
    let scheme = cfg.scheme();
    let mut rows = vec![CheckRow::new(
        "linear-solver-residual",
        "theta-scheme",
        rep.max_residual(),
        scheme.tolerance,
        1.0,
    )];
    if let Some(c) = &rep.certificate {
        let mut row = with_verdict(
            CheckRow::new("monotone-assembly", "discrete-maximum-principle", 0.0, 0.0, 1.0),
            c.ok,
        );
        // uncertified runs are empirical; a non-monotone assembly is reported, not failed
        if !c.ok && !scheme.certify {
            row.verdict = Verdict::NotApplicable;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn validate_coeffs(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let field = cfg.field()?;
    let d = &cfg.domain;
    let s = Sampling {
        t_max: d.t_max,
        x_half_width: d.x_half_width,
        y_max: d.y_max,
        seed: cfg.seed,
        slack: cfg.checks.assumption_slack,
        ..Sampling::default()
    };
    let rep = validate_assumptions(&field, &s)?;
    let m = field.meta;
    let rows: Vec<CheckRow> = rep
        .rows()
        .into_iter()
        .map(|(name, est, ok)| {
            let declared = match name {
                n if n.starts_with("ellipticity") => m.delta,
                "inward-drift" => m.nu,
                _ => m.k,
            };
            with_verdict(
                CheckRow::new(name, "structural-assumptions", est, declared, s.slack),
                ok,
            )
        })
        .collect();
    dir.write_csv(
        "declared.csv",
        &["delta", "k", "nu", "alpha"],
        [vec![fmt_f64(m.delta), fmt_f64(m.k), fmt_f64(m.nu), fmt_f64(m.alpha)]],
    )?;
    Ok(rows)
}

fn norm_records(label: &str, n: &WeightedNorm) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for piece in &n.pieces {
        let mut r = vec![label.to_string(), n.order.tag().to_string(), piece.region.clone()];
        r.extend(piece.csv_record());
        out.push(r);
    }
    out.push({
        let mut r = vec![label.to_string(), n.order.tag().to_string(), "total".to_string()];
        let mut blank = vec![String::new(); HolderReport::CSV_HEADER.len()];
        blank[1] = fmt_f64(n.alpha);
        blank[2] = fmt_f64(n.q);
        blank[3] = fmt_f64(n.sup);
        blank[5] = fmt_f64(n.total);
        r.extend(blank);
        r
    });
    out
}

fn norms_header() -> Vec<&'static str> {
    let mut h = vec!["quantity", "order", "region"];
    h.extend(HolderReport::CSV_HEADER);
    h
}

/// Weighted norms of the solution, the source and the initial datum on
/// the audit lattice of the base grid.
fn norms(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let (u, _) = solve_base(cfg)?;
    let points = AuditLattice::default().points(&u.grid);
    let b = budget(cfg);
    let n = &cfg.norms;
    let jets = u.audit_jets(&points)?;
    let un = weighted_norm(
        &points,
        FieldSamples::Jets(&jets),
        n.q,
        Order::TwoPlusAlpha,
        n.alpha,
        SecondOrderForm::Degenerate,
        &b,
    )?;
    let f = cfg.source()?;
    let fv = points.eval(f.as_ref());
    let fnorm = weighted_norm(
        &points,
        FieldSamples::Values(&fv),
        n.p,
        Order::Alpha,
        n.alpha,
        SecondOrderForm::Degenerate,
        &b,
    )?;
    let g = cfg.initial()?;
    let mut at_zero = PointSet::new(points.dim());
    for k in 0..points.len() {
        at_zero.push(0.0, points.x(k));
    }
    let gj = degenpara_core::holder::JetSamples::from_smooth(g.as_ref(), &at_zero);
    let gnorm = weighted_norm(
        &at_zero,
        FieldSamples::Jets(&gj),
        n.p,
        Order::TwoPlusAlpha,
        n.alpha,
        SecondOrderForm::Degenerate,
        &b,
    )?;
    let mut records = norm_records("solution", &un);
    records.extend(norm_records("source", &fnorm));
    records.extend(norm_records("initial", &gnorm));
    dir.write_csv("norms.csv", &norms_header(), records)?;
    let finite = [un.total, fnorm.total, gnorm.total].iter().all(|v| v.is_finite());
    Ok(vec![with_verdict(
        CheckRow::new("norms-finite", "weighted-holder-norm", un.total, f64::INFINITY, 1.0),
        finite,
    )])
}

fn data_sup(grid: &Grid, f: &dyn SpaceTimeFn, q: f64, times: &[f64]) -> f64 {
    let ns = grid.n_space();
    let mut m = 0.0f64;
    for &t in times {
        for k in 0..ns {
            let x = grid.node(k);
            let w = (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powf(q);
            m = m.max(w * f.eval(t, &x).abs());
        }
    }
    m
}

fn verify_maxprin(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let field = cfg.field()?;
    let (u, _) = solve_base(cfg)?;
    let grid = u.grid.clone();
    let f = cfg.source()?;
    let g = cfg.initial()?;
    let t_max = cfg.domain.t_max;
    let q = cfg.norms.q;
    let gc = growth_constants(&field, &grid);
    let mut rows = vec![
        check_sup_bound(
            &u,
            f.as_ref(),
            g.as_ref(),
            gc.k_sup(),
            t_max,
            AUDIT_MARGIN,
            cfg.checks.sup_slack,
        )?,
        check_weighted_bound(
            &u,
            f.as_ref(),
            g.as_ref(),
            gc.k_weighted(),
            q,
            t_max,
            AUDIT_MARGIN,
            cfg.checks.weighted_slack,
        )?,
    ];

    let d = grid.dim();
    let f_sup = data_sup(&grid, f.as_ref(), 0.0, &grid.times);
    let g_sup = data_sup(&grid, g.as_ref(), 0.0, &[0.0]);
    let f_q = data_sup(&grid, f.as_ref(), q, &grid.times);
    let g_q = data_sup(&grid, g.as_ref(), q, &[0.0]);
    let v1 = Supersolution::v1(d, gc.k_sup(), f_sup, g_sup);
    let candidates = [
        ("supersolution-h", Supersolution::h(d, gc.k_trace())),
        ("supersolution-v1", v1),
        ("supersolution-v2", Supersolution::v2(d, q, gc.k_weighted(), f_q, g_q)),
    ];
    let points = AuditLattice::default().points(&grid);
    for (id, v) in candidates {
        let m = supersolution_margin(&field, &v, &points)?;
        rows.push(CheckRow::new(
            id,
            "explicit-supersolution",
            -m.min,
            MARGIN_TOLERANCE,
            1.0,
        ));
    }

    let vgrid = GridFunction::from_fn(grid.clone(), &v1);
    let tol = 1e-8 * (1.0 + f_sup + g_sup);
    let mut neg = u.clone();
    neg.values.iter_mut().for_each(|x| *x = -*x);
    let mut records = Vec::new();
    for (id, w) in [("comparison-u-v1", &u), ("comparison-minus-u-v1", &neg)] {
        let out = comparison_check(&field, w, &vgrid, tol)?;
        let mut row = CheckRow::new(id, "comparison-principle", out.max_violation, tol, 1.0);
        row.verdict = out.verdict;
        records.push(vec![
            id.to_string(),
            out.verdict.to_string(),
            fmt_f64(out.operator_gap),
            fmt_f64(out.data_gap),
            fmt_f64(out.max_violation),
            out.certified.to_string(),
        ]);
        rows.push(row);
    }
    dir.write_csv(
        "comparison.csv",
        &[
            "check_id",
            "verdict",
            "operator_gap",
            "data_gap",
            "max_violation",
            "certified",
        ],
        records,
    )?;
    dir.write_csv(
        "growth.csv",
        &["c_sup", "trace_growth", "abs_growth", "k_sup", "k_weighted", "k_trace"],
        [vec![
            fmt_f64(gc.c_sup),
            fmt_f64(gc.trace_growth),
            fmt_f64(gc.abs_growth),
            fmt_f64(gc.k_sup()),
            fmt_f64(gc.k_weighted()),
            fmt_f64(gc.k_trace()),
        ]],
    )?;
    Ok(rows)
}

/// Barriers for model fields `a = I`, `b = (b^i, .., ν)` over the drift list,
/// one per lateral coordinate.
fn verify_barriers(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let d = cfg.dim();
    let nu = cfg.field()?.meta.nu.max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (k, &drift) in cfg.checks.barrier_drifts.iter().enumerate() {
        for index in 0..d - 1 {
            let mut b = vec![0.0; d];
            b[index] = drift;
            b[d - 1] = nu;
            let model =
                CoefficientField::constant(&DMatrix::identity(d, d), &DVector::from_vec(b), 0.0, cfg.norms.alpha)?;
            let br = Barrier::for_field(&model, index, cfg.checks.barrier_gamma, 0.0)?;
            let seed = cfg.seed.wrapping_add((k * d + index) as u64);
            let pts = br.sample_window(
                cfg.checks.barrier_samples,
                cfg.domain.y_max,
                cfg.domain.x_half_width,
                seed,
            );
            let res = barrier_residual(&br, &model, &pts)?;
            let mut row = res.row(&br);
            row.check_id = format!("{}-x{}", row.check_id, index + 1);
            records.push(vec![
                row.check_id.clone(),
                fmt_f64(br.b),
                fmt_f64(br.delta),
                fmt_f64(br.gamma),
                fmt_f64(br.big_c),
                fmt_f64(br.small_c),
                fmt_f64(res.min),
                res.n_points.to_string(),
            ]);
            rows.push(row);
        }
    }
    dir.write_csv(
        "barriers.csv",
        &[
            "check_id",
            "b",
            "delta",
            "gamma",
            "big_c",
            "small_c",
            "min_residual",
            "n_points",
        ],
        records,
    )?;
    Ok(rows)
}

/// Compactly supported test functions centred on the boundary.
pub fn default_test_functions(d: usize) -> Result<Vec<Bump>> {
    let specs = [
        (0.0, 1.0, 3, "1"),
        (0.2, 0.8, 4, "1 + t"),
        (-0.3, 0.9, 3, "cos(t)"),
        (0.0, 0.6, 5, "exp(-t)"),
        (0.4, 0.7, 3, "1 + t^2"),
    ];
    specs
        .iter()
        .map(|&(c, r, pw, prof)| {
            let mut centre = vec![0.0; d];
            centre[0] = c;
            Ok(Bump::new(centre, r, pw, Expr::parse(prof)?))
        })
        .collect()
}

fn interp_points(d: usize) -> PointSet {
    let times = [0.0, 0.25, 0.5];
    let n_lat = if d == 2 { 15 } else { 7 };
    let xs: Vec<f64> = (0..n_lat).map(|k| -1.0 + 2.0 * k as f64 / (n_lat - 1) as f64).collect();
    let ys: Vec<f64> = (0..10).map(|k| (k as f64 / 9.0).powi(2)).collect();
    let mut axes = vec![xs; d - 1];
    axes.push(ys);
    PointSet::lattice(&times, &axes)
}

fn verify_interp(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let d = cfg.dim();
    let funcs = default_test_functions(d)?;
    let refs: Vec<&dyn SmoothFn> = funcs.iter().map(|f| f as &dyn SmoothFn).collect();
    let pts = interp_points(d);
    let eps = &cfg.checks.interp_eps;
    let b = budget(cfg);
    let alpha = cfg.norms.alpha;
    let fits = interpolation_check(&refs, &pts, alpha, eps, &b)?;
    let mut rows = Vec::new();
    let mut fit_records = Vec::new();
    let mut inst_records = Vec::new();
    for f in &fits {
        let all = f.instances.iter().all(|i| f.holds(i, 1e-12));
        rows.push(with_verdict(
            CheckRow::new(
                format!("interp-{}", f.inequality),
                "interpolation",
                -f.worst_slack,
                0.0,
                1.0,
            ),
            f.feasible && all,
        ));
        fit_records.push(vec![
            f.inequality.tag().to_string(),
            fmt_f64(f.c),
            fmt_f64(f.m),
            fmt_f64(f.worst_slack),
            f.feasible.to_string(),
        ]);
        for i in &f.instances {
            inst_records.push(vec![
                f.inequality.tag().to_string(),
                i.function.to_string(),
                fmt_f64(i.eps),
                fmt_f64(i.lhs),
                fmt_f64(f.rhs(i)),
                fmt_f64(i.top),
                fmt_f64(i.sup),
            ]);
        }
    }
    let homog = homogeneity(&refs, &pts, alpha, eps, &b, 1e-12)?;
    rows.push(with_verdict(
        CheckRow::new("interp-homogeneity", "interpolation", 0.0, 0.0, 1.0),
        homog,
    ));
    dir.write_csv(
        "fits.csv",
        &["inequality", "c", "m", "worst_slack", "feasible"],
        fit_records,
    )?;
    dir.write_csv(
        "instances.csv",
        &["inequality", "function", "eps", "lhs", "rhs", "top_norm", "sup_norm"],
        inst_records,
    )?;
    Ok(rows)
}

fn ladder(cfg: &ExperimentConfig) -> Vec<GridSpec> {
    (0..cfg.checks.ladder_levels).map(|l| cfg.grid_spec(l)).collect()
}

fn verify_schauder(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let pb = cfg.problem()?;
    let scheme = cfg.scheme();
    let f = cfg.source()?;
    let g = cfg.initial()?;
    let b = budget(cfg);
    let mut ratios = Vec::new();
    let mut records = Vec::new();
    for spec in ladder(cfg) {
        let grid = Grid::new(spec.clone())?;
        let (u, _) = solve_cauchy(&pb, &grid, &scheme)?;
        let rep = schauder_ratio(
            &u,
            f.as_ref(),
            g.as_ref(),
            cfg.norms.alpha,
            cfg.norms.p,
            &AuditLattice::default(),
            &b,
        )?;
        records.push(vec![
            spec.n_lateral.to_string(),
            spec.n_normal.to_string(),
            spec.n_t.to_string(),
            fmt_f64(rep.solution.total),
            fmt_f64(rep.source.total),
            fmt_f64(rep.initial.total),
            fmt_f64(rep.ratio),
        ]);
        ratios.push(rep.ratio);
    }
    dir.write_csv(
        "ratios.csv",
        &[
            "n_lateral",
            "n_normal",
            "n_t",
            "solution_norm",
            "source_norm",
            "initial_norm",
            "ratio",
        ],
        records,
    )?;
    Ok(vec![ratio_stability(&ratios, cfg.checks.schauder_threshold)?])
}

fn reduce_kind(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let field = cfg.field()?;
    let plan = reduce(&field)?;
    dir.write_text("plan.txt", &plan.to_text())?;
    let a = field.eval(0.0, &vec![0.0; field.dim()])?.a;
    let cert = plan.certificate(&a, PLAN_TOLERANCE);
    let anchor = "model-form-reduction";
    Ok(vec![
        CheckRow::new("reduction-cross-terms", anchor, cert.cross_terms, PLAN_TOLERANCE, 1.0),
        CheckRow::new(
            "reduction-unit-diffusion",
            anchor,
            cert.unit_diffusion,
            PLAN_TOLERANCE,
            1.0,
        ),
        CheckRow::new(
            "reduction-orthogonality",
            anchor,
            cert.orthogonality,
            PLAN_TOLERANCE,
            1.0,
        ),
        CheckRow::new("reduction-inverse", anchor, cert.inverse, PLAN_TOLERANCE, 1.0),
        with_verdict(
            CheckRow::new("reduction-inward-drift", anchor, 0.0, cert.b_bar_d, 1.0),
            cert.b_bar_d > 0.0,
        ),
    ])
}

fn convergence(cfg: &ExperimentConfig, dir: &mut KindDir) -> Result<Vec<CheckRow>> {
    let field = cfg.field()?;
    let exact = cfg.exact()?;
    let table = convergence_study(&field, exact, &ladder(cfg), &cfg.scheme(), AUDIT_MARGIN)?;
    dir.write_text("convergence.csv", &table.to_csv())?;
    let worst = table.rows.iter().map(|r| r.error).fold(0.0, f64::max);
    let row = match table.order_h {
        Some(order) => CheckRow::new(
            "convergence-order-h",
            "manufactured-solution",
            cfg.checks.min_space_order,
            order,
            1.0,
        ),
        None => CheckRow::new(
            "convergence-exact",
            "manufactured-solution",
            worst,
            MACHINE_LEVEL_ERROR,
            1.0,
        ),
    };
    Ok(vec![row])
}
