//! Numerical toolkit for degenerate-parabolic operators on the half-space
//! `{x_d >= 0}` whose diffusion vanishes linearly at the boundary.

pub mod coeff;
pub mod error;
pub mod expr;
pub mod func;
pub mod grid;
pub mod holder;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod reduction;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use coeff::{
    dh_model_field, heston_field, validate_assumptions, AssumptionReport, CoefficientField, Coefficients, FieldKind,
    FieldMeta, Sampling,
};
pub use error::{Error, Result};
pub use expr::{Expr, ExprJet, Var};
pub use func::{Bump, Jet, SharedFn, SmoothFn, SpaceTimeFn};
pub use grid::{Grid, GridFunction, GridSpec, Spacing};
pub use holder::{
    holder_seminorm, holder_transform_check, weighted_norm, FieldSamples, HolderReport, JetSamples, Order, PairBudget,
    PointSet, Region, SecondOrderForm, SeminormEstimate, WeightedNorm,
};
pub use metric::{cycloidal_distance, parabolic_distance, Metric, SpaceTimePoint};
pub use reduction::{
    diagonalize_scale, eliminate_zeroth_order, map_grid_function, reduce, shear_coefficients, Direction, ReductionPlan,
};
pub use solver::{
    convergence_study, discretize_operator, exact_solution, manufactured_problem, max_error, solve_cauchy,
    CauchyProblem, Certificate, ConvergenceTable, DiscreteOperator, Manufactured, Scheme, SolveReport, TruncationBc,
    EXACT_SOLUTIONS,
};
pub use verify::{CheckRow, Verdict};
