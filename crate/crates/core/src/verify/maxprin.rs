//! Maximum-principle bounds, explicit supersolutions and discrete comparison.

use rayon::prelude::*;

use crate::coeff::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::func::{Jet, SmoothFn, SpaceTimeFn};
use crate::grid::{Grid, GridFunction};
use crate::holder::PointSet;
use crate::solver::{discretize_operator, DiscreteOperator};

use super::{in_audit_region, CheckRow, Verdict};

/// Rate `1 + q (q + 4) K` of the weighted supersolution.
pub fn weighted_rate(q: f64, k: f64) -> f64 {
    1.0 + q * (q + 4.0) * k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupersolutionKind {
    /// `1 + |x|^2`.
    H { lambda: f64 },
    /// `e^{Kt} (t F + G)`.
    V1 { k: f64, f_sup: f64, g_sup: f64 },
    /// `e^{λt} (F_q + G_q) / (1 + |x|^2)^{q/2}`.
    V2 { q: f64, lambda: f64, f_q: f64, g_q: f64 },
}

/// Closed-form comparison function with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supersolution {
    pub d: usize,
    pub kind: SupersolutionKind,
}

impl Supersolution {
    pub fn h(d: usize, k: f64) -> Self {
        Supersolution {
            d,
            kind: SupersolutionKind::H { lambda: 3.0 * k },
        }
    }

    pub fn v1(d: usize, k: f64, f_sup: f64, g_sup: f64) -> Self {
        Supersolution {
            d,
            kind: SupersolutionKind::V1 { k, f_sup, g_sup },
        }
    }

    pub fn v2(d: usize, q: f64, k: f64, f_q: f64, g_q: f64) -> Self {
        Supersolution {
            d,
            kind: SupersolutionKind::V2 {
                q,
                lambda: weighted_rate(q, k),
                f_q,
                g_q,
            },
        }
    }

    /// Lower bound `L v` must respect at `(t, x)`: `-λ h` for `h`, `F` for
    /// `v1`, and `v2` itself for `v2`.
    pub fn target(&self, t: f64, x: &[f64]) -> f64 {
        match self.kind {
            SupersolutionKind::H { lambda } => -lambda * self.eval(t, x),
            SupersolutionKind::V1 { f_sup, .. } => f_sup,
            SupersolutionKind::V2 { .. } => self.eval(t, x),
        }
    }
}

impl SpaceTimeFn for Supersolution {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.kind {
            SupersolutionKind::H { .. } => 1.0 + r2,
            SupersolutionKind::V1 { k, f_sup, g_sup } => (k * t).exp() * (t * f_sup + g_sup),
            SupersolutionKind::V2 { q, lambda, f_q, g_q } => {
                (lambda * t).exp() * (f_q + g_q) * (1.0 + r2).powf(-q / 2.0)
            }
        }
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        Some(self)
    }
}

impl SmoothFn for Supersolution {
    fn dim(&self) -> usize {
        self.d
    }

    fn jet(&self, t: f64, x: &[f64]) -> Jet {
        let d = self.d;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let value = self.eval(t, x);
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        let dt = match self.kind {
            SupersolutionKind::H { .. } => {
                for i in 0..d {
                    grad[i] = 2.0 * x[i];
                    hess[i * d + i] = 2.0;
                }
                0.0
            }
            SupersolutionKind::V1 { k, f_sup, .. } => k * value + (k * t).exp() * f_sup,
            SupersolutionKind::V2 { q, lambda, .. } => {
                let s = 1.0 + r2;
                for i in 0..d {
                    grad[i] = -q * x[i] / s * value;
                    for j in 0..d {
                        let mut h = q * (q + 2.0) * x[i] * x[j] / (s * s);
                        if i == j {
                            h -= q / s;
                        }
                        hess[i * d + j] = h * value;
                    }
                }
                lambda * value
            }
        };
        Jet { value, dt, grad, hess }
    }
}

/// Smallest `L v - target` over the points, with its location.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub min: f64,
    pub argmin: usize,
}

pub fn supersolution_margin(field: &CoefficientField, v: &Supersolution, points: &PointSet) -> Result<Margin> {
    if points.is_empty() {
        return Err(Error::EmptySample("no points"));
    }
    let (min, argmin) = (0..points.len())
        .into_par_iter()
        .map(|k| {
            let (t, x) = (points.t(k), points.x(k));
            let lv = field.apply(t, x, &v.jet(t, x));
            (lv - v.target(t, x), k)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(Margin { min, argmin })
}

/// Growth constants of a field over the nodes of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    /// `sup c`.
    pub c_sup: f64,
    /// `sup (x_d tr a + x · b) / (1 + |x|^2)`.
    pub trace_growth: f64,
    /// `sup (x_d sum |a^{ij}| + |x · b|) / (1 + |x|^2)`.
    pub abs_growth: f64,
}

impl GrowthConstants {
    /// Constant for the unweighted bound: only `c <= K` is needed.
    pub fn k_sup(&self) -> f64 {
        self.c_sup.max(0.0)
    }

    /// Constant for the weighted bound.
    pub fn k_weighted(&self) -> f64 {
        self.c_sup.max(self.abs_growth).max(0.0)
    }

    /// Constant for which `(L + 3K) (1 + |x|^2) >= 0`.
    pub fn k_trace(&self) -> f64 {
        self.c_sup.max(self.trace_growth).max(0.0)
    }
}

pub fn growth_constants(field: &CoefficientField, grid: &Grid) -> GrowthConstants {
    let d = grid.dim();
    let ns = grid.n_space();
    let times: Vec<f64> = if field.is_time_dependent() {
        grid.times.clone()
    } else {
        vec![0.0]
    };
    let per: Vec<(f64, f64, f64)> = (0..times.len() * ns)
        .into_par_iter()
        .map(|m| {
            let t = times[m / ns];
            let x = grid.node(m % ns);
            let mut a = vec![0.0; d * d];
            let mut b = vec![0.0; d];
            let c = field.eval_into(t, &x, &mut a, &mut b);
            let xd = x[d - 1];
            let r = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
            let xb: f64 = x.iter().zip(&b).map(|(u, v)| u * v).sum();
            let tr: f64 = (0..d).map(|i| a[i * d + i]).sum();
            let abs_a: f64 = a.iter().map(|v| v.abs()).sum();
            (c, (xd * tr + xb) / r, (xd * abs_a + xb.abs()) / r)
        })
        .collect();
    let fold = |f: fn(&(f64, f64, f64)) -> f64| per.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    GrowthConstants {
        c_sup: fold(|p| p.0),
        trace_growth: fold(|p| p.1),
        abs_growth: fold(|p| p.2),
    }
}

fn sup_over_grid(grid: &Grid, f: &dyn SpaceTimeFn, q: f64, times: &[f64]) -> f64 {
    let ns = grid.n_space();
    (0..times.len() * ns)
        .into_par_iter()
        .map(|m| {
            let x = grid.node(m % ns);
            let w = if q == 0.0 {
                1.0
            } else {
                (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powf(q)
            };
            w * f.eval(times[m / ns], &x).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// `(1 + |x|)^q`-weighted sup of a grid function over the audited region.
pub fn audited_sup(u: &GridFunction, q: f64, margin: f64) -> Result<f64> {
    let g = &u.grid;
    let ns = g.n_space();
    let mask: Vec<bool> = (0..ns).map(|k| in_audit_region(g, &g.node(k), margin)).collect();
    if !mask.iter().any(|m| *m) {
        return Err(Error::EmptySample("audited region has no nodes"));
    }
    Ok((0..u.values.len())
        .into_par_iter()
        .filter(|m| mask[m % ns])
        .map(|m| {
            let x = g.node(m % ns);
            let w = if q == 0.0 {
                1.0
            } else {
                (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powf(q)
            };
            w * u.values[m].abs()
        })
        .reduce(|| 0.0, f64::max))
}

/// `max |u| <= e^{KT} (T max|f| + max|g|)` on the audited region.
///
/// Data maxima are taken over every node of the grid.
pub fn check_sup_bound(
    u: &GridFunction,
    f: &dyn SpaceTimeFn,
    g: &dyn SpaceTimeFn,
    k: f64,
    t_max: f64,
    margin: f64,
    slack: f64,
) -> Result<CheckRow> {
    let grid = &u.grid;
    let lhs = audited_sup(u, 0.0, margin)?;
    let f_sup = sup_over_grid(grid, f, 0.0, &grid.times);
    let g_sup = sup_over_grid(grid, g, 0.0, &[0.0]);
    let rhs = (k * t_max).exp() * (t_max * f_sup + g_sup);
    Ok(CheckRow::new("sup-bound", "sup-bound", lhs, rhs, slack))
}

/// `‖u‖_{C^0_q} <= e^{λT} (‖f‖_{C^0_q} + ‖g‖_{C^0_q})` with `λ = 1 + q(q+4)K`.
pub fn check_weighted_bound(
    u: &GridFunction,
    f: &dyn SpaceTimeFn,
    g: &dyn SpaceTimeFn,
    k: f64,
    q: f64,
    t_max: f64,
    margin: f64,
    slack: f64,
) -> Result<CheckRow> {
    if !(q >= 0.0) {
        return Err(invalid("q", "must be nonnegative"));
    }
    let grid = &u.grid;
    let lhs = audited_sup(u, q, margin)?;
    let f_q = sup_over_grid(grid, f, q, &grid.times);
    let g_q = sup_over_grid(grid, g, q, &[0.0]);
    let rhs = (weighted_rate(q, k) * t_max).exp() * (f_q + g_q);
    Ok(CheckRow::new(
        format!("weighted-bound-q{q}"),
        "weighted-bound",
        lhs,
        rhs,
        slack,
    ))
}

/// Discrete `L w` at every implicit node of slices `1..`, as produced by
/// implicit Euler: `(w^n - w^{n-1}) / dt + S(t_n) w^n`.
///
/// Dirichlet nodes and the initial slice carry `NaN`.
pub fn discrete_operator_values(field: &CoefficientField, w: &GridFunction) -> Result<Vec<f64>> {
    let g = &w.grid;
    let ns = g.n_space();
    let dt = g.dt();
    let mut out = vec![f64::NAN; w.values.len()];
    let mut op: Option<DiscreteOperator> = None;
    for n in 1..g.n_slices() {
        if op.is_none() || field.is_time_dependent() {
            op = Some(discretize_operator(field, g, g.times[n])?);
        }
        let o = op.as_ref().unwrap();
        let sw = o.apply(w.slice(n));
        let (prev, cur) = (w.slice(n - 1), w.slice(n));
        for k in 0..ns {
            if !o.dirichlet[k] {
                out[n * ns + k] = (cur[k] - prev[k]) / dt + sw[k];
            }
        }
    }
    Ok(out)
}

/// Outcome of the discrete comparison implication.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub verdict: Verdict,
    /// Largest `Lu - Lv` over implicit nodes.
    pub operator_gap: f64,
    /// Largest `u - v` on the initial slice and truncation nodes.
    pub data_gap: f64,
    /// Largest `u - v` anywhere.
    pub max_violation: f64,
    pub certified: bool,
}

/// Checks `Lu <= Lv`, `u <= v` on data nodes `=> u <= v` everywhere.
///
/// Preconditions that fail by more than `tol` make the verdict
/// `NotApplicable`, as does an uncertified (non-monotone) operator.
pub fn comparison_check(
    field: &CoefficientField,
    u: &GridFunction,
    v: &GridFunction,
    tol: f64,
) -> Result<ComparisonOutcome> {
    if u.grid != v.grid {
        return Err(invalid("grids", "u and v must share a grid"));
    }
    let g = &u.grid;
    let ns = g.n_space();
    let mut certified = true;
    for n in 1..g.n_slices() {
        let op = discretize_operator(field, g, g.times[n])?;
        certified &= op.certificate(g.dt(), 1.0).ok;
        if !field.is_time_dependent() {
            break;
        }
    }
    let lu = discrete_operator_values(field, u)?;
    let lv = discrete_operator_values(field, v)?;
    let mut operator_gap = f64::NEG_INFINITY;
    let mut data_gap = f64::NEG_INFINITY;
    let mut max_violation = f64::NEG_INFINITY;
    for m in 0..u.values.len() {
        let diff = u.values[m] - v.values[m];
        max_violation = max_violation.max(diff);
        if lu[m].is_nan() {
            // initial slice or truncation node
            if m < ns || g.is_truncation(m % ns) {
                data_gap = data_gap.max(diff);
            }
        } else {
            operator_gap = operator_gap.max(lu[m] - lv[m]);
        }
    }
    let verdict = if !certified || operator_gap > tol || data_gap > tol {
        Verdict::NotApplicable
    } else {
        Verdict::from_bool(max_violation <= tol)
    };
    Ok(ComparisonOutcome {
        verdict,
        operator_gap,
        data_gap,
        max_violation,
        certified,
    })
}
