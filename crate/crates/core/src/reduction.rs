//! Reduction of a constant-coefficient operator to the model form
//!
//! ```text
//! w_tau = z_d Δ_z w + b̄ · ∇_z w
//! ```
//!
//! through `u = e^{ct} w`, a shear removing the cross terms with `x_d`, an
//! orthogonal diagonalisation with scaling, and the time change
//! `tau = sqrt(a^{dd}) t`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::coeff::{CoefficientField, FieldKind, FieldMeta};
use crate::error::{Error, Result};
use crate::func::{Jet, SharedFn, SmoothFn, SpaceTimeFn};
use crate::grid::{Grid, GridFunction};
use crate::io::fmt_f64;
use crate::linalg::symmetric_eigen;
use crate::solver::{CauchyProblem, TruncationBc};

/// The conjugation `u = e^{ct} w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugation {
    pub rate: f64,
}

impl Conjugation {
    pub fn multiplier(&self, t: f64) -> f64 {
        (self.rate * t).exp()
    }

    /// `w = e^{-ct} u`.
    pub fn reduce(&self, t: f64, u: f64) -> f64 {
        u / self.multiplier(t)
    }

    /// `u = e^{ct} w`.
    pub fn restore(&self, t: f64, w: f64) -> f64 {
        w * self.multiplier(t)
    }
}

/// Drops a constant zeroth-order term: `L u = f` iff `L_0 w = e^{-ct} f`.
pub fn eliminate_zeroth_order(field: &CoefficientField) -> Result<(CoefficientField, Conjugation)> {
    let rate = field.c_expr().as_const().ok_or(Error::NonConstantCoefficient)?;
    Ok((field.without_zeroth_order(), Conjugation { rate }))
}

/// Coefficients after `y_i = x_i + α_i x_d`, `y_d = x_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sheared {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub alpha: DVector<f64>,
}

/// Removes the cross terms `a^{id}`, `i < d`, by a shear.
///
/// The lateral block becomes the Schur complement
/// `a^{ij} - a^{id} a^{jd} / a^{dd}`; lateral drifts become
/// `b^i + α_i b^d` with `α_i = -a^{id} / a^{dd}`.
pub fn shear_coefficients(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Sheared> {
    let d = a.nrows();
    if a.ncols() != d || b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    for i in 0..d {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * a[(i, j)].abs().max(1.0) {
                return Err(Error::NonSymmetric(i, j));
            }
        }
    }
    let add = a[(d - 1, d - 1)];
    if !(add > 0.0) {
        return Err(Error::NotPositiveDefinite(add));
    }
    let alpha = DVector::from_iterator(d - 1, (0..d - 1).map(|i| -a[(i, d - 1)] / add));
    let mut s = DMatrix::<f64>::identity(d, d);
    for i in 0..d - 1 {
        s[(i, d - 1)] = alpha[i];
    }
    let mut sheared = &s * a * s.transpose();
    // Exact zeros instead of rounding residue.
    for i in 0..d - 1 {
        sheared[(i, d - 1)] = 0.0;
        sheared[(d - 1, i)] = 0.0;
        for j in 0..d - 1 {
            sheared[(i, j)] = a[(i, j)] - a[(i, d - 1)] * a[(j, d - 1)] / add;
        }
    }
    let bs = &s * b;
    Ok(Sheared {
        a: sheared,
        b: bs,
        alpha,
    })
}

/// Composite change of variables to the model form.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionPlan {
    pub d: usize,
    pub conjugation: Conjugation,
    pub alpha: DVector<f64>,
    pub a_dd: f64,
    /// Lateral block after the shear.
    pub block: DMatrix<f64>,
    /// Orthogonal eigenvectors and ascending eigenvalues of `block`.
    pub p: DMatrix<f64>,
    pub lambda: DVector<f64>,
    /// `block_diag(P D^{-1/2}, a_dd^{-1/2})`; points map by `z = Q^T y`.
    pub q: DMatrix<f64>,
    /// Original and sheared drift.
    pub b: DVector<f64>,
    pub b_sheared: DVector<f64>,
    /// Model drift.
    pub b_bar: DVector<f64>,
    /// `tau = time_scale * t`.
    pub time_scale: f64,
    /// `z = forward * x` and its exact inverse.
    pub forward: DMatrix<f64>,
    pub backward: DMatrix<f64>,
}

/// Completes a plan from sheared coefficients.
pub fn diagonalize_scale(
    sheared: &Sheared,
    original_b: &DVector<f64>,
    conjugation: Conjugation,
) -> Result<ReductionPlan> {
    let d = sheared.a.nrows();
    let add = sheared.a[(d - 1, d - 1)];
    let block = sheared.a.view((0, 0), (d - 1, d - 1)).clone_owned();
    let eig = symmetric_eigen(&block)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    let p = eig.vectors.clone();
    let lambda = eig.values.clone();
    let mut q = DMatrix::<f64>::zeros(d, d);
    let mut q_inv_t = DMatrix::<f64>::zeros(d, d);
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            q[(i, j)] = p[(i, j)] / lambda[j].sqrt();
            q_inv_t[(i, j)] = p[(i, j)] * lambda[j].sqrt();
        }
    }
    q[(d - 1, d - 1)] = 1.0 / add.sqrt();
    q_inv_t[(d - 1, d - 1)] = add.sqrt();

    let mut shear = DMatrix::<f64>::identity(d, d);
    let mut unshear = DMatrix::<f64>::identity(d, d);
    for i in 0..d - 1 {
        shear[(i, d - 1)] = sheared.alpha[i];
        unshear[(i, d - 1)] = -sheared.alpha[i];
    }
    let forward = q.transpose() * &shear;
    let backward = &unshear * &q_inv_t;
    let time_scale = add.sqrt();
    let b_bar = (&forward * original_b) / time_scale;
    Ok(ReductionPlan {
        d,
        conjugation,
        alpha: sheared.alpha.clone(),
        a_dd: add,
        block,
        p,
        lambda,
        q,
        b: original_b.clone(),
        b_sheared: sheared.b.clone(),
        b_bar,
        time_scale,
        forward,
        backward,
    })
}

/// Full pipeline for a constant-coefficient field.
pub fn reduce(field: &CoefficientField) -> Result<ReductionPlan> {
    if !field.is_constant() {
        return Err(Error::NonConstantCoefficient);
    }
    let (_, conj) = eliminate_zeroth_order(field)?;
    let co = field.eval(0.0, &vec![0.0; field.dim()])?;
    let sheared = shear_coefficients(&co.a, &co.b)?;
    diagonalize_scale(&sheared, &co.b, conj)
}

/// Residuals showing how well a plan reaches the model form.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCertificate {
    /// Largest `|a^{id}|` after the shear.
    pub cross_terms: f64,
    /// Largest deviation of the transformed diffusion from the identity.
    pub unit_diffusion: f64,
    /// Largest deviation of `P P^T` from the identity.
    pub orthogonality: f64,
    /// Largest deviation of `backward * forward` from the identity.
    pub inverse: f64,
    pub b_bar_d: f64,
    pub ok: bool,
}

impl ReductionPlan {
    pub fn forward_point(&self, x: &[f64]) -> Vec<f64> {
        (&self.forward * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect()
    }

    pub fn backward_point(&self, z: &[f64]) -> Vec<f64> {
        (&self.backward * DVector::from_column_slice(z))
            .iter()
            .copied()
            .collect()
    }

    pub fn forward_time(&self, t: f64) -> f64 {
        self.time_scale * t
    }

    pub fn backward_time(&self, tau: f64) -> f64 {
        tau / self.time_scale
    }

    /// The model operator `w_tau - z_d Δ w - b̄ · ∇ w`.
    pub fn model_field(&self) -> Result<CoefficientField> {
        let d = self.d;
        let a = DMatrix::<f64>::identity(d, d);
        let mut f = CoefficientField::constant(&a, &self.b_bar, 0.0, 0.5)?;
        f.meta = FieldMeta {
            delta: 1.0,
            k: f.meta.k,
            nu: self.b_bar[d - 1],
            alpha: 0.5,
        };
        f.kind = FieldKind::Constant;
        Ok(f)
    }

    /// Checks the plan against the coefficients it was built from.
    pub fn certificate(&self, a: &DMatrix<f64>, tol: f64) -> PlanCertificate {
        let d = self.d;
        let mut shear = DMatrix::<f64>::identity(d, d);
        for i in 0..d - 1 {
            shear[(i, d - 1)] = self.alpha[i];
        }
        let sheared = &shear * a * shear.transpose();
        let cross_terms = (0..d - 1).map(|i| sheared[(i, d - 1)].abs()).fold(0.0, f64::max);
        let transformed = &self.forward * a * self.forward.transpose();
        let unit_diffusion = (transformed - DMatrix::<f64>::identity(d, d)).amax();
        let orthogonality = (&self.p * self.p.transpose() - DMatrix::<f64>::identity(d - 1, d - 1)).amax();
        let inverse = (&self.backward * &self.forward - DMatrix::<f64>::identity(d, d)).amax();
        let b_bar_d = self.b_bar[d - 1];
        PlanCertificate {
            cross_terms,
            unit_diffusion,
            orthogonality,
            inverse,
            b_bar_d,
            ok: cross_terms <= tol && unit_diffusion <= tol && orthogonality <= tol && inverse <= tol && b_bar_d > 0.0,
        }
    }

    /// `w(tau, z) = e^{-ct} u(t, x)` with `t = tau / s`, `x = backward z`.
    pub fn to_model(self: &Arc<Self>, u: SharedFn) -> ModelFunction {
        ModelFunction { plan: self.clone(), u }
    }

    /// `u(t, x) = e^{ct} w(s t, forward x)`.
    pub fn from_model(self: &Arc<Self>, w: SharedFn) -> OriginalFunction {
        OriginalFunction { plan: self.clone(), w }
    }

    /// The model-form problem `L̄ w = f̄`, `w(0) = ḡ` on `[0, s T]`.
    pub fn transform_problem(self: &Arc<Self>, problem: &CauchyProblem) -> Result<CauchyProblem> {
        let source = ScaledSource {
            plan: self.clone(),
            f: problem.source.clone(),
        };
        let initial = self.to_model(problem.initial.clone());
        let mut out = CauchyProblem::new(
            self.model_field()?,
            Arc::new(source),
            Arc::new(InitialOnly(Arc::new(initial))),
            self.forward_time(problem.t_max),
        )?;
        out.p = problem.p;
        out.truncation = match &problem.truncation {
            TruncationBc::FrozenInitial => TruncationBc::FrozenInitial,
            TruncationBc::Exact(u) => TruncationBc::Exact(Arc::new(self.to_model(u.clone()))),
        };
        Ok(out)
    }

    /// Full-precision text block, matrices row-major.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let vec = |v: &DVector<f64>| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
        let mat = |s: &mut String, name: &str, m: &DMatrix<f64>| {
            let _ = writeln!(s, "{name} {}x{}", m.nrows(), m.ncols());
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
                let _ = writeln!(s, "  {}", row.join(" "));
            }
        };
        let _ = writeln!(s, "d {}", self.d);
        let _ = writeln!(s, "zeroth_order_rate {}", fmt_f64(self.conjugation.rate));
        let _ = writeln!(s, "alpha {}", vec(&self.alpha));
        let _ = writeln!(s, "a_dd {}", fmt_f64(self.a_dd));
        let _ = writeln!(s, "lambda {}", vec(&self.lambda));
        mat(&mut s, "P", &self.p);
        mat(&mut s, "Q", &self.q);
        let _ = writeln!(s, "b {}", vec(&self.b));
        let _ = writeln!(s, "b_sheared {}", vec(&self.b_sheared));
        let _ = writeln!(s, "b_bar {}", vec(&self.b_bar));
        let _ = writeln!(s, "time_scale {}", fmt_f64(self.time_scale));
        mat(&mut s, "forward", &self.forward);
        mat(&mut s, "backward", &self.backward);
        s
    }
}

/// A function of the original variables seen in model variables.
pub struct ModelFunction {
    plan: Arc<ReductionPlan>,
    u: SharedFn,
}

impl SpaceTimeFn for ModelFunction {
    fn eval(&self, tau: f64, z: &[f64]) -> f64 {
        let t = self.plan.backward_time(tau);
        let x = self.plan.backward_point(z);
        self.plan.conjugation.reduce(t, self.u.eval(t, &x))
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        self.u.as_smooth().map(|_| self as &dyn SmoothFn)
    }
}

impl SmoothFn for ModelFunction {
    fn dim(&self) -> usize {
        self.plan.d
    }

    fn jet(&self, tau: f64, z: &[f64]) -> Jet {
        let plan = &self.plan;
        let d = plan.d;
        let t = plan.backward_time(tau);
        let x = plan.backward_point(z);
        let uj = self.u.as_smooth().expect("smooth inner function").jet(t, &x);
        let m = 1.0 / plan.conjugation.multiplier(t);
        let g = &plan.backward;
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for k in 0..d {
            grad[k] = m * (0..d).map(|i| uj.grad[i] * g[(i, k)]).sum::<f64>();
            for l in 0..d {
                let mut h = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        h += g[(i, k)] * uj.hess[i * d + j] * g[(j, l)];
                    }
                }
                hess[k * d + l] = m * h;
            }
        }
        Jet {
            value: m * uj.value,
            dt: m * (uj.dt - plan.conjugation.rate * uj.value) / plan.time_scale,
            grad,
            hess,
        }
    }
}

/// A model-variable function seen in the original variables.
pub struct OriginalFunction {
    plan: Arc<ReductionPlan>,
    w: SharedFn,
}

impl SpaceTimeFn for OriginalFunction {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let z = self.plan.forward_point(x);
        self.plan
            .conjugation
            .restore(t, self.w.eval(self.plan.forward_time(t), &z))
    }
}

struct ScaledSource {
    plan: Arc<ReductionPlan>,
    f: SharedFn,
}

impl SpaceTimeFn for ScaledSource {
    fn eval(&self, tau: f64, z: &[f64]) -> f64 {
        let t = self.plan.backward_time(tau);
        let x = self.plan.backward_point(z);
        self.plan.conjugation.reduce(t, self.f.eval(t, &x)) / self.plan.time_scale
    }
}

struct InitialOnly(SharedFn);

impl SpaceTimeFn for InitialOnly {
    fn eval(&self, _t: f64, x: &[f64]) -> f64 {
        self.0.eval(0.0, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Original variables to model variables.
    Forward,
    /// Model variables to original variables.
    Backward,
}

/// Resamples a grid function through the plan onto `target` by multilinear
/// interpolation, including the conjugation and the time change.
///
/// Target nodes whose image leaves the source grid are refused.
pub fn map_grid_function(
    plan: &ReductionPlan,
    f: &GridFunction,
    target: &Grid,
    direction: Direction,
) -> Result<GridFunction> {
    if f.grid.dim() != plan.d || target.dim() != plan.d {
        return Err(Error::DimensionMismatch {
            expected: plan.d,
            got: target.dim(),
        });
    }
    let ns = target.n_space();
    let values: Result<Vec<f64>> = (0..target.n_slices() * ns)
        .into_par_iter()
        .map(|m| {
            let s = target.times[m / ns];
            let p = target.node(m % ns);
            match direction {
                Direction::Forward => {
                    let t = plan.backward_time(s);
                    let x = plan.backward_point(&p);
                    Ok(plan.conjugation.reduce(t, f.interpolate(t, &x)?))
                }
                Direction::Backward => {
                    let tau = plan.forward_time(s);
                    let z = plan.forward_point(&p);
                    Ok(plan.conjugation.restore(s, f.interpolate(tau, &z)?))
                }
            }
        })
        .collect();
    Ok(GridFunction {
        grid: target.clone(),
        values: values?,
    })
}

/// Smallest symmetric model box containing the image of an original box
/// `[-X, X]^{d-1} x [0, Y]`: returns `(Z, Y')`.
pub fn model_box(plan: &ReductionPlan, x_half_width: f64, y_max: f64) -> (f64, f64) {
    let d = plan.d;
    let mut z = 0.0f64;
    for k in 0..d - 1 {
        let reach: f64 = (0..d - 1)
            .map(|i| plan.forward[(k, i)].abs() * x_half_width)
            .sum::<f64>()
            + plan.forward[(k, d - 1)].abs() * y_max;
        z = z.max(reach);
    }
    (z, y_max / plan.a_dd.sqrt())
}
