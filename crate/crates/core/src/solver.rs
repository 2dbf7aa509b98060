//! Monotone finite-difference solver for the Cauchy problem
//! `L u = f` on `(0, T] x {x_d > 0}`, `u(0) = g`, on a truncated box.
//!
//! No condition is imposed on `{x_d = 0}`: the diffusion vanishes there and
//! the inward drift makes the one-sided stencil self-contained.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::coeff::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::expr::Expr;
use crate::func::{SharedFn, SpaceTimeFn};
use crate::grid::{fornberg_weights, Grid, GridFunction, GridSpec};
use crate::io::fmt_f64;
use crate::sparse::{bicgstab, Csr};

/// Values imposed on the lateral faces and the top face `x_d = Y`.
#[derive(Clone, Default)]
pub enum TruncationBc {
    /// `g(x)`, frozen in time.
    #[default]
    FrozenInitial,
    /// A known solution, for manufactured-solution runs.
    Exact(SharedFn),
}

impl std::fmt::Debug for TruncationBc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruncationBc::FrozenInitial => f.write_str("FrozenInitial"),
            TruncationBc::Exact(_) => f.write_str("Exact(..)"),
        }
    }
}

#[derive(Clone)]
pub struct CauchyProblem {
    pub field: CoefficientField,
    pub source: SharedFn,
    pub initial: SharedFn,
    pub t_max: f64,
    /// Weight exponent used when norms of the solution are reported.
    pub p: f64,
    pub truncation: TruncationBc,
}

impl CauchyProblem {
    pub fn new(field: CoefficientField, source: SharedFn, initial: SharedFn, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(invalid("t_max", "horizon must be positive"));
        }
        Ok(CauchyProblem {
            field,
            source,
            initial,
            t_max,
            p: 0.0,
            truncation: TruncationBc::FrozenInitial,
        })
    }

    fn boundary_value(&self, t: f64, x: &[f64]) -> f64 {
        match &self.truncation {
            TruncationBc::FrozenInitial => self.initial.eval(0.0, x),
            TruncationBc::Exact(u) => u.eval(t, x),
        }
    }
}

/// Time integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Scheme {
    /// `1` is implicit Euler, `1/2` Crank-Nicolson.
    pub theta: f64,
    /// Refuse to step when the assembled system is not an M-matrix.
    pub certify: bool,
    pub tolerance: f64,
    /// Defaults to `10 sqrt(N)` when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme {
            theta: 1.0,
            certify: true,
            tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

/// Spatial part `S` of the discrete operator at one time, so the scheme
/// reads `(u^n - u^{n-1}) / dt + S u^n = f^n` at implicit rows.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub t: f64,
    pub s: Csr,
    /// Rows replaced by the truncation condition.
    pub dirichlet: Vec<bool>,
}

/// Sign pattern of the assembled system `I / dt + theta S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub dt: f64,
    pub theta: f64,
    pub max_offdiagonal: f64,
    pub min_diagonal: f64,
    pub min_row_sum: f64,
    /// First offending node, if any.
    pub worst_node: Option<usize>,
    pub positive_offdiagonals: usize,
    pub ok: bool,
}

impl DiscreteOperator {
    /// Checks `I / dt + theta S` on the rows that are not Dirichlet.
    pub fn certificate(&self, dt: f64, theta: f64) -> Certificate {
        let mut cert = Certificate {
            dt,
            theta,
            max_offdiagonal: f64::NEG_INFINITY,
            min_diagonal: f64::INFINITY,
            min_row_sum: f64::INFINITY,
            worst_node: None,
            positive_offdiagonals: 0,
            ok: true,
        };
        for i in 0..self.s.n {
            if self.dirichlet[i] {
                continue;
            }
            let mut diag = 1.0 / dt;
            let mut sum = 1.0 / dt;
            let mut bad = false;
            for (c, v) in self.s.row(i) {
                let v = theta * v;
                sum += v;
                if c == i {
                    diag += v;
                } else {
                    cert.max_offdiagonal = cert.max_offdiagonal.max(v);
                    if v > 0.0 {
                        cert.positive_offdiagonals += 1;
                        bad = true;
                    }
                }
            }
            cert.min_diagonal = cert.min_diagonal.min(diag);
            cert.min_row_sum = cert.min_row_sum.min(sum);
            if diag <= 0.0 || sum <= 0.0 {
                bad = true;
            }
            if bad && cert.worst_node.is_none() {
                cert.worst_node = Some(i);
            }
        }
        cert.ok = cert.worst_node.is_none();
        cert
    }

    /// `(S u)_k` for every row (zero at Dirichlet rows).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.s.mul_vec(u, &mut out);
        out
    }
}

/// Upwind/centred entries of `S = -(x_d a D^2 + b D + c)` at node `k`.
fn assemble_row(field: &CoefficientField, grid: &Grid, t: f64, k: usize) -> Vec<(usize, f64)> {
    let d = grid.dim();
    let mut x = vec![0.0; d];
    grid.node_into(k, &mut x);
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let c = field.eval_into(t, &x, &mut a, &mut b);
    let xd = x[d - 1];
    let idx = grid.multi_index(k);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(1 + 4 * d + 4 * d * d);
    row.push((k, -c));
    let neighbour = |axis: usize, off: isize| -> usize { (k as isize + off * grid.stride(axis) as isize) as usize };
    let spacing = |axis: usize| -> (f64, f64) {
        let ax = &grid.axes[axis];
        let i = idx[axis];
        let hm = if i > 0 { ax[i] - ax[i - 1] } else { f64::NAN };
        let hp = if i + 1 < ax.len() { ax[i + 1] - ax[i] } else { f64::NAN };
        (hm, hp)
    };
    if xd > 0.0 {
        for i in 0..d {
            let (hm, hp) = spacing(i);
            let coef = xd * a[i * d + i];
            if coef != 0.0 {
                let wm = 2.0 / (hm * (hm + hp));
                let wp = 2.0 / (hp * (hm + hp));
                row.push((neighbour(i, -1), -coef * wm));
                row.push((neighbour(i, 1), -coef * wp));
                row.push((k, coef * (wm + wp)));
            }
        }
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let coef = xd * a[i * d + j];
                if coef == 0.0 {
                    continue;
                }
                let wi = centred_first(grid, i, idx[i]);
                let wj = centred_first(grid, j, idx[j]);
                for (oi, vi) in wi {
                    if vi == 0.0 {
                        continue;
                    }
                    for (oj, vj) in wj {
                        if vj == 0.0 {
                            continue;
                        }
                        let col = (k as isize + oi * grid.stride(i) as isize + oj * grid.stride(j) as isize) as usize;
                        row.push((col, -coef * vi * vj));
                    }
                }
            }
        }
    }
    for i in 0..d {
        let bi = b[i];
        if bi == 0.0 {
            continue;
        }
        let (hm, hp) = spacing(i);
        // Forward difference at the boundary layer regardless of sign; the
        // certificate catches an outward drift there.
        let forward = bi > 0.0 || (i == d - 1 && idx[i] == 0);
        if forward {
            row.push((neighbour(i, 1), -bi / hp));
            row.push((k, bi / hp));
        } else {
            row.push((neighbour(i, -1), bi / hm));
            row.push((k, -bi / hm));
        }
    }
    row
}

fn centred_first(grid: &Grid, axis: usize, i: usize) -> [(isize, f64); 3] {
    let ax = &grid.axes[axis];
    let w = fornberg_weights(ax[i], &[ax[i - 1], ax[i], ax[i + 1]], 1);
    [(-1, w[1][0]), (0, w[1][1]), (1, w[1][2])]
}

/// Assembles the spatial operator at time `t`.
pub fn discretize_operator(field: &CoefficientField, grid: &Grid, t: f64) -> Result<DiscreteOperator> {
    if field.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: field.dim(),
        });
    }
    let n = grid.n_space();
    let dirichlet: Vec<bool> = (0..n).map(|k| grid.is_truncation(k)).collect();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            if dirichlet[k] {
                Vec::new()
            } else {
                assemble_row(field, grid, t, k)
            }
        })
        .collect();
    let s = Csr::from_rows(rows);
    if s.vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("assembled operator"));
    }
    Ok(DiscreteOperator { t, s, dirichlet })
}

/// Per-step and aggregate statistics of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub theta: f64,
    pub dt: f64,
    pub unknowns: usize,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub assemblies: usize,
    pub certificate: Option<Certificate>,
}

impl SolveReport {
    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,t,iterations,relative_residual\n");
        for (n, (it, r)) in self.iterations.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                n + 1,
                fmt_f64((n + 1) as f64 * self.dt),
                it,
                fmt_f64(*r)
            );
        }
        s
    }
}

fn sample_slice(f: &dyn SpaceTimeFn, grid: &Grid, t: f64) -> Vec<f64> {
    (0..grid.n_space())
        .into_par_iter()
        .map(|k| f.eval(t, &grid.node(k)))
        .collect()
}

/// Marches the theta-scheme over every time slice of `grid`.
pub fn solve_cauchy(problem: &CauchyProblem, grid: &Grid, scheme: &Scheme) -> Result<(GridFunction, SolveReport)> {
    if !(0.5..=1.0).contains(&scheme.theta) {
        return Err(invalid("theta", "must lie in [1/2, 1]"));
    }
    if (grid.spec.t_max - problem.t_max).abs() > 1e-12 * problem.t_max {
        return Err(invalid("t_max", "grid horizon differs from the problem horizon"));
    }
    let n = grid.n_space();
    let dt = grid.dt();
    let theta = scheme.theta;
    let cap = scheme
        .max_iterations
        .unwrap_or_else(|| ((10.0 * (n as f64).sqrt()).ceil() as usize).max(50));
    let mut u = GridFunction::zeros(grid.clone());
    let g0 = sample_slice(problem.initial.as_ref(), grid, 0.0);
    if g0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial data"));
    }
    u.slice_mut(0).copy_from_slice(&g0);

    let time_dependent = problem.field.is_time_dependent();
    let mut op_prev = discretize_operator(&problem.field, grid, 0.0)?;
    let mut assemblies = 1;
    let mut f_prev = sample_slice(problem.source.as_ref(), grid, 0.0);
    let mut report = SolveReport {
        theta,
        dt,
        unknowns: n,
        iterations: Vec::with_capacity(grid.n_slices() - 1),
        residuals: Vec::with_capacity(grid.n_slices() - 1),
        assemblies: 0,
        certificate: None,
    };
    let mut system: Option<Csr> = None;
    for step in 1..grid.n_slices() {
        let t = grid.times[step];
        let op = if time_dependent {
            assemblies += 1;
            system = None;
            discretize_operator(&problem.field, grid, t)?
        } else {
            op_prev.clone()
        };
        if system.is_none() {
            let cert = op.certificate(dt, theta);
            if scheme.certify && !cert.ok {
                let node = cert.worst_node.unwrap_or(0);
                return Err(Error::Monotonicity {
                    node,
                    reason: format!(
                        "assembled system is not an M-matrix at {:?} (max off-diagonal {:e}, min row sum {:e}); try a smaller time step or a finer grid",
                        grid.node(node),
                        cert.max_offdiagonal,
                        cert.min_row_sum
                    ),
                });
            }
            if report
                .certificate
                .as_ref()
                .is_none_or(|c| cert.min_row_sum < c.min_row_sum)
            {
                report.certificate = Some(cert);
            }
            system = Some(build_system(&op, dt, theta));
        }
        let f_now = sample_slice(problem.source.as_ref(), grid, t);
        let prev = u.slice(step - 1).to_vec();
        let explicit = if theta < 1.0 {
            op_prev.apply(&prev)
        } else {
            vec![0.0; n]
        };
        let mut rhs: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                if op.dirichlet[k] {
                    problem.boundary_value(t, &grid.node(k))
                } else {
                    prev[k] / dt - (1.0 - theta) * explicit[k] + theta * f_now[k] + (1.0 - theta) * f_prev[k]
                }
            })
            .collect();
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        let mut x = prev;
        let stats = bicgstab(system.as_ref().unwrap(), &rhs, &mut x, scheme.tolerance, cap)?;
        report.iterations.push(stats.iterations);
        report.residuals.push(stats.relative_residual);
        u.slice_mut(step).copy_from_slice(&x);
        rhs.clear();
        f_prev = f_now;
        op_prev = op;
    }
    report.assemblies = assemblies;
    Ok((u, report))
}

fn build_system(op: &DiscreteOperator, dt: f64, theta: f64) -> Csr {
    let n = op.s.n;
    let rows = (0..n)
        .map(|i| {
            if op.dirichlet[i] {
                vec![(i, 1.0)]
            } else {
                let mut r: Vec<(usize, f64)> = op.s.row(i).map(|(c, v)| (c, theta * v)).collect();
                r.push((i, 1.0 / dt));
                r
            }
        })
        .collect();
    Csr::from_rows(rows)
}

/// `L u*` and `u*(0, .)` for a known solution with exact derivatives.
#[derive(Clone)]
pub struct Manufactured {
    pub exact: SharedFn,
    pub source: SharedFn,
    pub initial: SharedFn,
}

struct AppliedOperator {
    field: CoefficientField,
    u: SharedFn,
}

impl SpaceTimeFn for AppliedOperator {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let jet = self.u.as_smooth().expect("checked at construction").jet(t, x);
        self.field.apply(t, x, &jet)
    }
}

struct InitialSlice(SharedFn);

impl SpaceTimeFn for InitialSlice {
    fn eval(&self, _t: f64, x: &[f64]) -> f64 {
        self.0.eval(0.0, x)
    }
}

/// Builds `f = L u*` and `g = u*(0, .)` from exact derivatives.
pub fn manufactured_problem(u_star: SharedFn, field: &CoefficientField) -> Result<Manufactured> {
    let smooth = u_star.as_smooth().ok_or(Error::MissingDerivatives)?;
    if smooth.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: smooth.dim(),
        });
    }
    Ok(Manufactured {
        source: Arc::new(AppliedOperator {
            field: field.clone(),
            u: u_star.clone(),
        }),
        initial: Arc::new(InitialSlice(u_star.clone())),
        exact: u_star,
    })
}

/// Registered closed-form solutions, by name, in dimension `d`.
pub fn exact_solution(name: &str, d: usize) -> Option<Expr> {
    let y = Expr::x(d - 1);
    let e = match name {
        "constant" => Expr::c(1.0),
        "exp-linear" => Expr::t().neg().exp().mul(Expr::c(1.0).add(y)),
        "exp-quadratic" => Expr::t().neg().exp().mul(y.powi(2)),
        "exp-sine" => {
            let lateral = if d > 1 { Expr::x(0).sin() } else { Expr::c(1.0) };
            Expr::t().neg().exp().mul(
                Expr::c(1.0)
                    .add(lateral.mul(y.clone()))
                    .add(y.clone().mul(y).mul(Expr::c(0.5))),
            )
        }
        "exp-cosine" => {
            let lateral = if d > 1 { Expr::x(0).cos() } else { Expr::c(1.0) };
            Expr::t()
                .neg()
                .exp()
                .mul(lateral.mul(Expr::c(1.0).add(y.clone().sin())))
        }
        "linear-time" => Expr::c(1.0).add(Expr::t().mul(Expr::c(2.0))).add(y),
        // Affine in t, so implicit Euler is exact in time and only the
        // spatial stencils contribute error.
        "affine-time-sine" => {
            let lateral = if d > 1 { Expr::x(0).sin() } else { Expr::c(1.0) };
            Expr::c(1.0).add(Expr::t()).mul(
                Expr::c(1.0)
                    .add(lateral.mul(y.clone()))
                    .add(y.clone().mul(y).mul(Expr::c(0.5))),
            )
        }
        _ => return None,
    };
    Some(e)
}

pub const EXACT_SOLUTIONS: [&str; 7] = [
    "constant",
    "exp-linear",
    "exp-quadratic",
    "exp-sine",
    "exp-cosine",
    "linear-time",
    "affine-time-sine",
];

/// Max nodal error against a known solution, over nodes selected by `keep`.
pub fn max_error<F: Fn(f64, &[f64]) -> bool + Sync>(u: &GridFunction, exact: &dyn SpaceTimeFn, keep: F) -> f64 {
    let g = &u.grid;
    let ns = g.n_space();
    (0..u.values.len())
        .into_par_iter()
        .map(|m| {
            let t = g.times[m / ns];
            let x = g.node(m % ns);
            if keep(t, &x) {
                (u.values[m] - exact.eval(t, &x)).abs()
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dt: f64,
    pub error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub order_h: Option<f64>,
    /// Least-squares slope of `log error` against `log dt`.
    pub order_dt: Option<f64>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,dt,max_error,iterations\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_f64(r.h),
                fmt_f64(r.dt),
                fmt_f64(r.error),
                r.iterations
            );
        }
        s
    }
}

/// Errors below this are treated as exact and no order is fitted.
pub const MACHINE_LEVEL_ERROR: f64 = 1e-11;

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|v| *v <= MACHINE_LEVEL_ERROR) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Solves a manufactured problem on each grid of the ladder and fits orders.
///
/// Errors are measured on all nodes at distance at least `margin` (as a
/// fraction of the box) from the lateral and top faces.
pub fn convergence_study(
    field: &CoefficientField,
    u_star: SharedFn,
    ladder: &[GridSpec],
    scheme: &Scheme,
    margin: f64,
) -> Result<ConvergenceTable> {
    if ladder.len() < 3 {
        return Err(invalid("ladder", "need at least three grids"));
    }
    let m = manufactured_problem(u_star, field)?;
    let mut rows = Vec::with_capacity(ladder.len());
    for spec in ladder {
        let grid = Grid::new(spec.clone())?;
        let mut problem = CauchyProblem::new(field.clone(), m.source.clone(), m.initial.clone(), spec.t_max)?;
        problem.truncation = TruncationBc::Exact(m.exact.clone());
        let (u, rep) = solve_cauchy(&problem, &grid, scheme)?;
        let xw = spec.x_half_width * (1.0 - margin);
        let yw = spec.y_max * (1.0 - margin);
        let d = spec.d;
        let err = max_error(&u, m.exact.as_ref(), |_, x| {
            x[..d - 1].iter().all(|v| v.abs() <= xw) && x[d - 1] <= yw
        });
        rows.push(ConvergenceRow {
            h: grid.max_spacing(),
            dt: grid.dt(),
            error: err,
            iterations: rep.total_iterations(),
        });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let distinct = |v: &[f64]| v.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-14 * w[0].abs());
    Ok(ConvergenceTable {
        order_h: if distinct(&hs) { fit_order(&hs, &errs) } else { None },
        order_dt: if distinct(&dts) { fit_order(&dts, &errs) } else { None },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::dh_model_field;
    use crate::func::{constant, smooth};
    use crate::grid::Spacing;
    use nalgebra::{DMatrix, DVector};

    fn spec(n: usize, spacing: Spacing) -> GridSpec {
        GridSpec {
            d: 2,
            t_max: 0.5,
            n_t: 8,
            x_half_width: 1.0,
            n_lateral: n,
            y_max: 2.0,
            n_normal: n,
            spacing,
        }
    }

    #[test]
    fn interior_stencil_is_scaled_laplacian_plus_upwind() {
        let nu = 1.5;
        let field = dh_model_field(nu, 2).unwrap();
        let grid = Grid::new(spec(5, Spacing::Uniform)).unwrap();
        let op = discretize_operator(&field, &grid, 0.0).unwrap();
        // node (x1, y) = (0, 1): indices (2, 2), h = 0.5
        let k = grid.flat_index(&[2, 2]);
        let h2 = 0.25;
        let y = 1.0;
        let row: Vec<(usize, f64)> = op.s.row(k).collect();
        let get = |c: usize| row.iter().find(|e| e.0 == c).map_or(0.0, |e| e.1);
        assert!((get(k) - (4.0 * y / h2 + nu / 0.5)).abs() < 1e-12);
        assert!((get(grid.flat_index(&[1, 2])) + y / h2).abs() < 1e-12);
        assert!((get(grid.flat_index(&[3, 2])) + y / h2).abs() < 1e-12);
        assert!((get(grid.flat_index(&[2, 1])) + y / h2).abs() < 1e-12);
        assert!((get(grid.flat_index(&[2, 3])) + y / h2 + nu / 0.5).abs() < 1e-12);
        assert_eq!(row.len(), 5);
    }

    #[test]
    fn boundary_row_has_no_diffusion() {
        let field = dh_model_field(1.0, 2).unwrap();
        let grid = Grid::new(spec(5, Spacing::Graded)).unwrap();
        let op = discretize_operator(&field, &grid, 0.0).unwrap();
        let k = grid.flat_index(&[2, 0]);
        let row: Vec<(usize, f64)> = op.s.row(k).collect();
        let h = grid.axes[1][1];
        assert_eq!(row, vec![(k, 1.0 / h), (grid.flat_index(&[2, 1]), -1.0 / h)]);
    }

    #[test]
    fn constants_in_kernel() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let field = CoefficientField::constant(&a, &DVector::from_vec(vec![0.0, 0.0]), 0.0, 0.5).unwrap();
        let grid = Grid::new(spec(7, Spacing::Graded)).unwrap();
        let op = discretize_operator(&field, &grid, 0.0).unwrap();
        for i in 0..grid.n_space() {
            let s: f64 = op.s.row(i).map(|e| e.1).sum();
            assert!(s.abs() < 1e-10, "row {i} sum {s}");
        }
    }

    #[test]
    fn zero_and_constant_data() {
        let field = dh_model_field(1.0, 2).unwrap();
        let grid = Grid::new(spec(9, Spacing::Graded)).unwrap();
        let p = CauchyProblem::new(field.clone(), constant(0.0), constant(0.0), 0.5).unwrap();
        let (u, _) = solve_cauchy(&p, &grid, &Scheme::default()).unwrap();
        assert_eq!(u.sup(), 0.0);
        let p = CauchyProblem::new(field, constant(0.0), constant(1.0), 0.5).unwrap();
        let (u, rep) = solve_cauchy(&p, &grid, &Scheme::default()).unwrap();
        assert!(u.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(rep.certificate.unwrap().ok);
        assert_eq!(rep.assemblies, 1);
    }

    #[test]
    fn manufactured_sources_match_hand_formulas() {
        let nu = 0.7;
        let field = dh_model_field(nu, 2).unwrap();
        let m = manufactured_problem(smooth(exact_solution("exp-linear", 2).unwrap(), 2), &field).unwrap();
        let m2 = manufactured_problem(smooth(exact_solution("exp-quadratic", 2).unwrap(), 2), &field).unwrap();
        for (t, x) in [(0.0, [0.0, 0.0]), (0.3, [0.5, 1.2]), (1.0, [-2.0, 3.0])] {
            let e = (-t as f64).exp();
            let y = x[1];
            assert!((m.source.eval(t, &x) + e * (1.0 + y + nu)).abs() < 1e-14);
            assert!((m.initial.eval(t, &x) - (1.0 + y)).abs() < 1e-15);
            assert!((m2.source.eval(t, &x) + e * (y * y + 2.0 * y + 2.0 * nu * y)).abs() < 1e-13);
        }
        let plain = crate::func::closure(|_, _| 1.0);
        assert!(matches!(
            manufactured_problem(plain, &field),
            Err(Error::MissingDerivatives)
        ));
    }

    #[test]
    fn order_fit() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v| 3.0 * v * v).collect();
        assert!((fit_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_order(&h, &[1e-15, 1e-15, 1e-15]).is_none());
    }

    #[test]
    fn short_ladder_rejected() {
        let field = dh_model_field(1.0, 2).unwrap();
        let u = smooth(Expr::c(1.0), 2);
        assert!(convergence_study(&field, u, &[spec(5, Spacing::Uniform)], &Scheme::default(), 0.25).is_err());
    }

    #[test]
    fn theta_out_of_range() {
        let field = dh_model_field(1.0, 2).unwrap();
        let grid = Grid::new(spec(5, Spacing::Uniform)).unwrap();
        let p = CauchyProblem::new(field, constant(0.0), constant(0.0), 0.5).unwrap();
        let s = Scheme {
            theta: 0.3,
            ..Scheme::default()
        };
        assert!(solve_cauchy(&p, &grid, &s).is_err());
    }
}
