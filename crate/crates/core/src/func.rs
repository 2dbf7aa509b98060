//! Scalar fields on the space-time half-cylinder.

use std::fmt;
use std::sync::Arc;

use crate::expr::{Expr, ExprJet};

/// A scalar function of `(t, x)`.
pub trait SpaceTimeFn: Send + Sync {
    fn eval(&self, t: f64, x: &[f64]) -> f64;

    /// Exact derivative access, when the function registers one.
    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        None
    }
}

/// Value, time derivative, gradient and Hessian (row-major `d x d`) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dt: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.grad.len() + j]
    }

    pub fn scaled(mut self, s: f64) -> Jet {
        self.value *= s;
        self.dt *= s;
        self.grad.iter_mut().for_each(|g| *g *= s);
        self.hess.iter_mut().for_each(|h| *h *= s);
        self
    }
}

/// A function with exact first and second derivatives.
pub trait SmoothFn: SpaceTimeFn {
    fn dim(&self) -> usize;
    fn jet(&self, t: f64, x: &[f64]) -> Jet;
}

/// Shared, type-erased scalar field.
pub type SharedFn = Arc<dyn SpaceTimeFn>;

/// Wraps a closure; no derivatives are registered.
pub struct FnField<F>(pub F);

impl<F> SpaceTimeFn for FnField<F>
where
    F: Fn(f64, &[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.0)(t, x)
    }
}

impl<F> fmt::Debug for FnField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnField(..)")
    }
}

pub fn closure<F>(f: F) -> SharedFn
where
    F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
{
    Arc::new(FnField(f))
}

pub fn constant(v: f64) -> SharedFn {
    Arc::new(Expr::Const(v))
}

pub fn smooth(e: Expr, d: usize) -> Arc<ExprJet> {
    Arc::new(ExprJet::new(e, d))
}

/// Compactly supported polynomial bump `T(t) * (1 - |x - x0|^2 / R^2)_+^k`
/// with a time profile `T` given as an expression in `t`.
///
/// `k >= 3` keeps the spatial part `C^2`, so the jet is exact everywhere.
#[derive(Debug, Clone)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub power: i32,
    time: Expr,
    time_dt: Expr,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64, power: i32, time_profile: Expr) -> Self {
        assert!(power >= 3, "bump power must be at least 3");
        assert!(radius > 0.0, "bump radius must be positive");
        let time_dt = time_profile.diff(crate::expr::Var::Time);
        Bump {
            center,
            radius,
            power,
            time: time_profile,
            time_dt,
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }
}

impl SpaceTimeFn for Bump {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let w = 1.0 - r2 / (self.radius * self.radius);
        if w <= 0.0 {
            0.0
        } else {
            self.time.eval(t, x) * w.powi(self.power)
        }
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        Some(self)
    }
}

impl SmoothFn for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn jet(&self, t: f64, x: &[f64]) -> Jet {
        let d = self.center.len();
        let r2inv = 1.0 / (self.radius * self.radius);
        let dx: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let w = 1.0 - dx.iter().map(|v| v * v).sum::<f64>() * r2inv;
        let mut jet = Jet {
            value: 0.0,
            dt: 0.0,
            grad: vec![0.0; d],
            hess: vec![0.0; d * d],
        };
        if w <= 0.0 {
            return jet;
        }
        let k = self.power as f64;
        let tv = self.time.eval(t, x);
        let tdt = self.time_dt.eval(t, x);
        let wk = w.powi(self.power);
        let wk1 = w.powi(self.power - 1);
        let wk2 = w.powi(self.power - 2);
        jet.value = tv * wk;
        jet.dt = tdt * wk;
        for i in 0..d {
            jet.grad[i] = tv * k * wk1 * (-2.0 * dx[i] * r2inv);
            for j in 0..d {
                let mut h = k * (k - 1.0) * wk2 * 4.0 * dx[i] * dx[j] * r2inv * r2inv;
                if i == j {
                    h -= 2.0 * k * wk1 * r2inv;
                }
                jet.hess[i * d + j] = tv * h;
            }
        }
        jet
    }
}

/// `scale * f`, preserving exact derivatives.
pub struct Scaled<F: ?Sized> {
    pub scale: f64,
    pub inner: Arc<F>,
}

impl<F: SmoothFn + ?Sized> SpaceTimeFn for Scaled<F> {
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.scale * self.inner.eval(t, x)
    }

    fn as_smooth(&self) -> Option<&dyn SmoothFn> {
        Some(self)
    }
}

impl<F: SmoothFn + ?Sized> SmoothFn for Scaled<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, t: f64, x: &[f64]) -> Jet {
        self.inner.jet(t, x).scaled(self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_jet_matches_finite_differences() {
        let b = Bump::new(vec![0.2, 0.0], 1.5, 4, Expr::parse("1 + t^2").unwrap());
        let (t, x) = (0.3, [0.5, 0.4]);
        let jet = b.jet(t, &x);
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (b.eval(t, &xp) - b.eval(t, &xm)) / (2.0 * h);
            assert!((fd - jet.grad[i]).abs() < 1e-7, "grad {i}");
            for j in 0..2 {
                let gp = b.jet(t, &xp).grad[j];
                let gm = b.jet(t, &xm).grad[j];
                assert!(((gp - gm) / (2.0 * h) - jet.hess(i, j)).abs() < 1e-6);
            }
        }
        let fdt = (b.eval(t + h, &x) - b.eval(t - h, &x)) / (2.0 * h);
        assert!((fdt - jet.dt).abs() < 1e-7);
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let b = Bump::new(vec![0.0, 0.0], 1.0, 3, Expr::c(1.0));
        assert_eq!(b.eval(0.0, &[1.0, 0.5]), 0.0);
        let jet = b.jet(0.0, &[2.0, 0.0]);
        assert!(jet.grad.iter().chain(&jet.hess).all(|v| *v == 0.0));
    }
}
