//! Lateral barrier functions for the model operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coeff::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::func::{Jet, SmoothFn, SpaceTimeFn};
use crate::holder::PointSet;

use super::CheckRow;

/// `φ = (1 + x_i - bτ)^{-2} + (1 - x_i - bτ)^{-2}` with `τ = t - t0`.
///
/// The inequality checked is `L0 φ > -C x_d φ² + c φ^{3/2} + c` for
/// `t ∈ [t0, t0 + Δ]` and `1 ± x_i - bτ >= γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    pub d: usize,
    /// Lateral coordinate, `0 <= index < d - 1`.
    pub index: usize,
    pub t0: f64,
    /// Lateral drift `b^i` the constants were built for.
    pub drift: f64,
    pub b: f64,
    pub delta: f64,
    pub gamma: f64,
    pub big_c: f64,
    pub small_c: f64,
}

/// Fraction of the admissible time span `(1 - γ) / b` that is used.
pub const DELTA_FRACTION: f64 = 0.9;

impl Barrier {
    pub fn new(d: usize, index: usize, drift: f64, gamma: f64, t0: f64) -> Result<Self> {
        if d < 2 || index + 1 >= d {
            return Err(invalid("index", "must be a lateral coordinate"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid("gamma", "must lie in (0, 1)"));
        }
        if !drift.is_finite() || !t0.is_finite() {
            return Err(Error::NonFinite("barrier parameter"));
        }
        let b = drift.abs() + 1.0;
        // Each term lies in [(2-γ)^{-2}, γ^{-2}], so the smallest value of
        // φ₊^{3/2} + φ₋^{3/2} is 2 (2-γ)^{-3}. With b ± b^i >= 1 and
        // φ^{3/2} <= √2 (φ₊^{3/2} + φ₋^{3/2}), any c below
        // 2S / (√2 S + 1) works; half of it leaves a uniform margin.
        let s_min = 2.0 * (2.0 - gamma).powi(-3);
        let c_max = 2.0 * s_min / (std::f64::consts::SQRT_2 * s_min + 1.0);
        Ok(Barrier {
            d,
            index,
            t0,
            drift,
            b,
            delta: DELTA_FRACTION * (1.0 - gamma) / b,
            gamma,
            big_c: 6.0,
            small_c: 0.5 * c_max,
        })
    }

    /// Builds the barrier for the lateral drift of a constant model field.
    pub fn for_field(field: &CoefficientField, index: usize, gamma: f64, t0: f64) -> Result<Self> {
        if !field.is_constant() {
            return Err(Error::NonConstantCoefficient);
        }
        let d = field.dim();
        let x = vec![0.0; d];
        let mut a = vec![0.0; d * d];
        let mut bv = vec![0.0; d];
        field.eval_into(0.0, &x, &mut a, &mut bv);
        if index + 1 >= d {
            return Err(invalid("index", "must be a lateral coordinate"));
        }
        Barrier::new(d, index, bv[index], gamma, t0)
    }

    fn gaps(&self, t: f64, x: &[f64]) -> (f64, f64) {
        let bt = self.b * (t - self.t0);
        let xi = x[self.index];
        (1.0 + xi - bt, 1.0 - xi - bt)
    }

    pub fn in_window(&self, t: f64, x: &[f64]) -> bool {
        let tol = 1e-12;
        let (p, m) = self.gaps(t, x);
        t >= self.t0 - tol
            && t <= self.t0 + self.delta + tol
            && p >= self.gamma - tol
            && m >= self.gamma - tol
            && x[self.d - 1] >= 0.0
    }

    /// Seeded window samples; every fifth point sits on `x_d = 0` and the
    /// window corners are always included.
    pub fn sample_window(&self, n: usize, y_max: f64, lateral_spread: f64, seed: u64) -> PointSet {
        let d = self.d;
        let mut pts = PointSet::new(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; d];
        for &tau in &[0.0, self.delta] {
            let edge = 1.0 - self.gamma - self.b * tau;
            for &xi in &[-edge, 0.0, edge] {
                for &xd in &[0.0, y_max] {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    x[self.index] = xi;
                    x[d - 1] = xd;
                    pts.push(self.t0 + tau, &x);
                }
            }
        }
        while pts.len() < n {
            let tau = rng.gen_range(0.0..=self.delta);
            let edge = 1.0 - self.gamma - self.b * tau;
            for (k, v) in x.iter_mut().enumerate().take(d - 1) {
                *v = if k == self.index {
                    rng.gen_range(-edge..=edge)
                } else {
                    rng.gen_range(-lateral_spread..=lateral_spread)
                };
            }
            x[d - 1] = if pts.len() % 5 == 0 {
                0.0
            } else {
                rng.gen_range(0.0..=y_max)
            };
            pts.push(self.t0 + tau, &x);
        }
        pts
    }

    /// `L0 φ + C x_d φ² - c φ^{3/2} - c` at one point.
    pub fn residual_at(&self, field: &CoefficientField, t: f64, x: &[f64]) -> f64 {
        let jet = self.jet(t, x);
        let phi = jet.value;
        field.apply(t, x, &jet) + self.big_c * x[self.d - 1] * phi * phi - self.small_c * phi.powf(1.5) - self.small_c
    }
}

impl SpaceTimeFn for Barrier {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let (p, m) = self.gaps(t, x);
        p.powi(-2) + m.powi(-2)
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        Some(self)
    }
}

impl SmoothFn for Barrier {
    fn dim(&self) -> usize {
        self.d
    }

    fn jet(&self, t: f64, x: &[f64]) -> Jet {
        let d = self.d;
        let i = self.index;
        let (p, m) = self.gaps(t, x);
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        grad[i] = -2.0 * p.powi(-3) + 2.0 * m.powi(-3);
        hess[i * d + i] = 6.0 * (p.powi(-4) + m.powi(-4));
        Jet {
            value: p.powi(-2) + m.powi(-2),
            dt: 2.0 * self.b * (p.powi(-3) + m.powi(-3)),
            grad,
            hess,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierResidual {
    pub min: f64,
    pub argmin: usize,
    pub n_points: usize,
}

impl BarrierResidual {
    pub fn passed(&self) -> bool {
        self.min > 0.0
    }

    pub fn row(&self, barrier: &Barrier) -> CheckRow {
        // lhs <= rhs: 0 <= min residual, reported as -min <= 0
        let mut row = CheckRow::new(format!("barrier-bi{}", barrier.drift), "barrier", 0.0, self.min, 1.0);
        row.verdict = super::Verdict::from_bool(self.passed());
        row
    }
}

/// Minimum residual of the barrier inequality over the samples.
///
/// The field must be a constant model operator: unit diffusion and no
/// zeroth-order term.
pub fn barrier_residual(barrier: &Barrier, field: &CoefficientField, points: &PointSet) -> Result<BarrierResidual> {
    if !field.is_constant() {
        return Err(Error::NonConstantCoefficient);
    }
    let d = barrier.d;
    if field.dim() != d || points.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if field.dim() != d { field.dim() } else { points.dim() },
        });
    }
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let c = field.eval_into(0.0, &vec![0.0; d], &mut a, &mut b);
    if c != 0.0 {
        return Err(invalid("field", "zeroth-order term must vanish"));
    }
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            if (a[i * d + j] - want).abs() > 1e-12 {
                return Err(invalid("field", "diffusion must be the identity"));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySample("no barrier samples"));
    }
    for k in 0..points.len() {
        if !barrier.in_window(points.t(k), points.x(k)) {
            let mut p = vec![points.t(k)];
            p.extend_from_slice(points.x(k));
            return Err(Error::OutsideValidityWindow(p));
        }
    }
    let (min, argmin) = (0..points.len())
        .into_par_iter()
        .map(|k| (barrier.residual_at(field, points.t(k), points.x(k)), k))
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(BarrierResidual {
        min,
        argmin,
        n_points: points.len(),
    })
}
