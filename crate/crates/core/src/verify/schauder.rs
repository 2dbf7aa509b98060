//! Ratio of the solution's unweighted `2+α` norm to the weighted data norms.

use crate::error::{Error, Result};
use crate::func::SpaceTimeFn;
use crate::grid::{Grid, GridFunction};
use crate::holder::{
    weighted_norm, FieldSamples, JetSamples, Order, PairBudget, PointSet, SecondOrderForm, WeightedNorm,
};

use super::CheckRow;

/// Fixed sample lattice inside the audited region, independent of the
/// solver grid so that ratios from a refinement ladder are comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditLattice {
    pub n_t: usize,
    pub n_lateral: usize,
    pub n_normal: usize,
    pub margin: f64,
}

impl Default for AuditLattice {
    fn default() -> Self {
        AuditLattice {
            n_t: 5,
            n_lateral: 9,
            n_normal: 9,
            margin: super::AUDIT_MARGIN,
        }
    }
}

impl AuditLattice {
    /// Times exclude `t = 0`, where one-sided time differences are least
    /// accurate. The normal axis is refined quadratically toward `x_d = 0`.
    pub fn points(&self, grid: &Grid) -> PointSet {
        let s = &grid.spec;
        let lin = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64)
                .collect()
        };
        let times: Vec<f64> = (1..=self.n_t).map(|k| s.t_max * k as f64 / self.n_t as f64).collect();
        let xw = s.x_half_width * (1.0 - self.margin);
        let yw = s.y_max * (1.0 - self.margin);
        let mut axes = vec![lin(-xw, xw, self.n_lateral); s.d - 1];
        axes.push(
            (0..self.n_normal)
                .map(|k| {
                    let r = k as f64 / (self.n_normal - 1) as f64;
                    yw * r * r
                })
                .collect(),
        );
        PointSet::lattice(&times, &axes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchauderReport {
    pub ratio: f64,
    pub alpha: f64,
    pub p: f64,
    pub solution: WeightedNorm,
    pub source: WeightedNorm,
    pub initial: WeightedNorm,
    pub n_points: usize,
}

impl SchauderReport {
    pub fn denominator(&self) -> f64 {
        self.source.total + self.initial.total
    }
}

/// Jets of a time-independent initial datum on every lattice point.
fn initial_jets(g: &dyn SpaceTimeFn, points: &PointSet) -> Result<JetSamples> {
    let sm = g.as_smooth().ok_or(Error::MissingDerivatives)?;
    let mut at_zero = PointSet::new(points.dim());
    for k in 0..points.len() {
        at_zero.push(0.0, points.x(k));
    }
    let mut jets = JetSamples::from_smooth(sm, &at_zero);
    jets.dt.iter_mut().for_each(|v| *v = 0.0);
    Ok(jets)
}

/// `‖u‖_{2+α} / (‖f‖_{α,p} + ‖g‖_{2+α,p})` on a fixed audit lattice.
///
/// The numerator is unweighted and uses the split second-order form; the
/// data norms carry weight `p`. Solution derivatives are finite-difference
/// jets interpolated from the grid.
pub fn schauder_ratio(
    u: &GridFunction,
    f: &dyn SpaceTimeFn,
    g: &dyn SpaceTimeFn,
    alpha: f64,
    p: f64,
    lattice: &AuditLattice,
    budget: &PairBudget,
) -> Result<SchauderReport> {
    let points = lattice.points(&u.grid);
    let jets = u.audit_jets(&points)?;
    let solution = weighted_norm(
        &points,
        FieldSamples::Jets(&jets),
        0.0,
        Order::TwoPlusAlpha,
        alpha,
        SecondOrderForm::Split,
        budget,
    )?;
    let fv = points.eval(f);
    let source = weighted_norm(
        &points,
        FieldSamples::Values(&fv),
        p,
        Order::Alpha,
        alpha,
        SecondOrderForm::Degenerate,
        budget,
    )?;
    let gj = initial_jets(g, &points)?;
    let initial = weighted_norm(
        &points,
        FieldSamples::Jets(&gj),
        p,
        Order::TwoPlusAlpha,
        alpha,
        SecondOrderForm::Degenerate,
        budget,
    )?;
    let denom = source.total + initial.total;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("source and initial data both vanish"));
    }
    Ok(SchauderReport {
        ratio: solution.total / denom,
        alpha,
        p,
        solution,
        source,
        initial,
        n_points: points.len(),
    })
}

/// Relative change of the ratio between the two finest grids of a ladder.
pub fn ratio_stability(ratios: &[f64], threshold: f64) -> Result<CheckRow> {
    if ratios.len() < 2 {
        return Err(Error::EmptySample("need at least two ratios"));
    }
    let (a, b) = (ratios[ratios.len() - 2], ratios[ratios.len() - 1]);
    if a == 0.0 {
        return Err(Error::ZeroDenominator("coarser ratio vanishes"));
    }
    Ok(CheckRow::new(
        "schauder-stability",
        "schauder-ratio",
        (b - a).abs() / a,
        threshold,
        1.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::dh_model_field;
    use crate::expr::Expr;
    use crate::func::{constant, smooth};
    use crate::grid::{GridSpec, Spacing};
    use crate::solver::{solve_cauchy, CauchyProblem, Scheme};

    fn grid() -> Grid {
        Grid::new(GridSpec {
            d: 2,
            t_max: 0.5,
            n_t: 4,
            x_half_width: 2.0,
            n_lateral: 9,
            y_max: 2.0,
            n_normal: 9,
            spacing: Spacing::Graded,
        })
        .unwrap()
    }

    #[test]
    fn zero_data_is_an_error() {
        let g = grid();
        let u = GridFunction::zeros(g);
        let r = schauder_ratio(
            &u,
            constant(0.0).as_ref(),
            smooth(Expr::Const(0.0), 2).as_ref(),
            0.5,
            1.0,
            &AuditLattice::default(),
            &PairBudget::default(),
        );
        assert!(matches!(r, Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn constant_solution_ratio_at_most_one() {
        let g = grid();
        let field = dh_model_field(1.0, 2).unwrap();
        let pb = CauchyProblem::new(field, constant(0.0), constant(1.0), 0.5).unwrap();
        let (u, _) = solve_cauchy(&pb, &g, &Scheme::default()).unwrap();
        let rep = schauder_ratio(
            &u,
            constant(0.0).as_ref(),
            smooth(Expr::Const(1.0), 2).as_ref(),
            0.5,
            1.0,
            &AuditLattice::default(),
            &PairBudget::default(),
        )
        .unwrap();
        assert!((rep.solution.total - 1.0).abs() < 1e-9, "{}", rep.solution.total);
        assert!(rep.initial.total >= 1.0);
        assert!(rep.ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn stability_row() {
        let r = ratio_stability(&[1.0, 1.1, 1.2], 0.25).unwrap();
        assert!(r.passed());
        let r = ratio_stability(&[1.0, 2.0], 0.25).unwrap();
        assert!(!r.passed());
    }
}
