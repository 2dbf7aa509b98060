//! Empirical fits of the interpolation inequalities in the cycloidal
//! Hölder scale:
//! `lhs(u) <= ε ‖u‖_{2+α} + C ε^{-m} ‖u‖_C`.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::func::SmoothFn;
use crate::holder::{cycloidal_norms, CycloidalNorms, JetSamples, PairBudget, PointSet};

/// Left-hand sides of the four inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// `‖u‖_{α}`.
    HolderValue,
    /// `sup |∇u|`.
    Gradient,
    /// `‖x_d ∇u‖_{α}`.
    WeightedGradient,
    /// `sup |x_d D²u|`.
    WeightedHessian,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::HolderValue,
        Inequality::Gradient,
        Inequality::WeightedGradient,
        Inequality::WeightedHessian,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Inequality::HolderValue => "holder-value",
            Inequality::Gradient => "gradient",
            Inequality::WeightedGradient => "weighted-gradient",
            Inequality::WeightedHessian => "weighted-hessian",
        }
    }

    pub fn lhs(self, n: &CycloidalNorms) -> f64 {
        match self {
            Inequality::HolderValue => n.alpha_u,
            Inequality::Gradient => n.sup_grad,
            Inequality::WeightedGradient => n.alpha_xd_grad,
            Inequality::WeightedHessian => n.sup_xd_hess,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Candidate exponents `0, 0.25, ..., 4`.
pub fn exponent_grid() -> Vec<f64> {
    (0..=16).map(|k| 0.25 * k as f64).collect()
}

/// One `(function, ε)` instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub function: usize,
    pub eps: f64,
    pub lhs: f64,
    pub top: f64,
    pub sup: f64,
}

/// Fitted constants for one inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationFit {
    pub inequality: Inequality,
    pub eps: Vec<f64>,
    pub c: f64,
    pub m: f64,
    /// `min (rhs - lhs)` over instances with the fitted constants.
    pub worst_slack: f64,
    pub feasible: bool,
    pub instances: Vec<Instance>,
}

impl InterpolationFit {
    pub fn holds(&self, inst: &Instance, tol: f64) -> bool {
        inst.lhs <= self.rhs(inst) * (1.0 + tol)
    }

    pub fn rhs(&self, inst: &Instance) -> f64 {
        inst.eps * inst.top + self.c * inst.eps.powf(-self.m) * inst.sup
    }
}

/// Smallest `C` per `m` on the exponent grid; the `m` minimising the
/// coefficient `C ε_min^{-m}` at the finest `ε` is kept.
pub fn fit(inequality: Inequality, instances: &[Instance]) -> InterpolationFit {
    let mut eps: Vec<f64> = instances.iter().map(|i| i.eps).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let eps_min = eps.first().copied().unwrap_or(1.0);
    let mut best: Option<(f64, f64, f64)> = None;
    let mut feasible = true;
    for m in exponent_grid() {
        let mut c = 0.0f64;
        for inst in instances {
            let excess = (inst.lhs - inst.eps * inst.top).max(0.0);
            if excess == 0.0 {
                continue;
            }
            if inst.sup == 0.0 {
                feasible = false;
                c = f64::INFINITY;
                break;
            }
            c = c.max(excess * inst.eps.powf(m) / inst.sup);
        }
        let score = c * eps_min.powf(-m);
        if best.map_or(true, |b| score < b.2) {
            best = Some((c, m, score));
        }
    }
    let (c, m, _) = best.unwrap_or((0.0, 0.0, 0.0));
    let mut out = InterpolationFit {
        inequality,
        eps,
        c,
        m,
        worst_slack: f64::INFINITY,
        feasible: feasible && c.is_finite(),
        instances: instances.to_vec(),
    };
    out.worst_slack = instances
        .iter()
        .map(|i| out.rhs(i) - i.lhs)
        .fold(f64::INFINITY, f64::min);
    out
}

/// Norms of each test function on a shared point set.
pub fn function_norms(
    functions: &[&dyn SmoothFn],
    points: &PointSet,
    alpha: f64,
    budget: &PairBudget,
) -> Result<Vec<CycloidalNorms>> {
    functions
        .iter()
        .map(|f| {
            if f.dim() != points.dim() {
                return Err(Error::DimensionMismatch {
                    expected: points.dim(),
                    got: f.dim(),
                });
            }
            cycloidal_norms(points, &JetSamples::from_smooth(*f, points), alpha, budget)
        })
        .collect()
}

fn instances_from(norms: &[CycloidalNorms], eps: &[f64], ineq: Inequality) -> Vec<Instance> {
    let mut out = Vec::new();
    for (k, n) in norms.iter().enumerate() {
        for &e in eps {
            out.push(Instance {
                function: k,
                eps: e,
                lhs: ineq.lhs(n),
                top: n.two_alpha,
                sup: n.sup_u,
            });
        }
    }
    out
}

/// Fits `(C, m)` for each inequality over all functions and `ε` values.
pub fn interpolation_check(
    functions: &[&dyn SmoothFn],
    points: &PointSet,
    alpha: f64,
    eps: &[f64],
    budget: &PairBudget,
) -> Result<Vec<InterpolationFit>> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(invalid("eps", "ladder entries must lie in (0, 1)"));
    }
    if functions.is_empty() {
        return Err(Error::EmptySample("no test functions"));
    }
    let norms = function_norms(functions, points, alpha, budget)?;
    Ok(fits_from_norms(&norms, eps))
}

pub fn fits_from_norms(norms: &[CycloidalNorms], eps: &[f64]) -> Vec<InterpolationFit> {
    Inequality::ALL
        .iter()
        .map(|&q| fit(q, &instances_from(norms, eps, q)))
        .collect()
}

/// Refits with every function doubled and reports whether the fitted
/// `(C, m)` and feasibility are unchanged.
pub fn homogeneity(
    functions: &[&dyn SmoothFn],
    points: &PointSet,
    alpha: f64,
    eps: &[f64],
    budget: &PairBudget,
    rel_tol: f64,
) -> Result<bool> {
    let base = function_norms(functions, points, alpha, budget)?;
    let doubled = functions
        .iter()
        .map(|f| cycloidal_norms(points, &JetSamples::from_smooth(*f, points).scaled(2.0), alpha, budget))
        .collect::<Result<Vec<_>>>()?;
    let a = fits_from_norms(&base, eps);
    let b = fits_from_norms(&doubled, eps);
    let close = |p: f64, q: f64| (p - q).abs() <= rel_tol * p.abs().max(q.abs());
    Ok(a.iter()
        .zip(&b)
        .all(|(x, y)| x.feasible == y.feasible && x.m == y.m && close(x.c, y.c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::func::Bump;
    use crate::holder::PointSet;

    fn lattice(r: f64, n: usize) -> PointSet {
        let xs: Vec<f64> = (0..n).map(|k| -r + 2.0 * r * k as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = (0..n).map(|k| r * k as f64 / (n - 1) as f64).collect();
        PointSet::lattice(&[0.0], &[xs, ys])
    }

    #[test]
    fn zero_function_fits_with_zero_constant() {
        let zero = Bump::new(vec![0.0, 0.0], 1.0, 3, Expr::Const(0.0));
        let pts = lattice(1.0, 12);
        let fits = interpolation_check(&[&zero], &pts, 0.5, &[0.5, 0.25, 0.1], &PairBudget::default()).unwrap();
        for f in fits {
            assert!(f.feasible);
            assert_eq!(f.c, 0.0);
        }
    }

    #[test]
    fn bump_fit_feasible_and_all_instances_hold() {
        let u = Bump::new(vec![0.0, 0.0], 1.0, 4, Expr::Const(1.0));
        let pts = lattice(1.0, 14);
        let eps = [0.5, 0.25, 0.1];
        let fits = interpolation_check(&[&u], &pts, 0.5, &eps, &PairBudget::default()).unwrap();
        for f in &fits {
            assert!(f.feasible);
            assert!(f.c >= 0.0 && f.m >= 0.0);
            for inst in &f.instances {
                assert!(f.holds(inst, 1e-12), "{} {:?}", f.inequality, inst);
            }
        }
        assert!(homogeneity(&[&u], &pts, 0.5, &eps, &PairBudget::default(), 1e-12).unwrap());
    }

    #[test]
    fn rejects_bad_ladder() {
        let u = Bump::new(vec![0.0, 0.0], 1.0, 3, Expr::Const(1.0));
        let pts = lattice(1.0, 5);
        assert!(interpolation_check(&[&u], &pts, 0.5, &[1.5], &PairBudget::default()).is_err());
    }
}
