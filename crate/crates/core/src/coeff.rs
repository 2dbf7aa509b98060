//! Coefficient fields `(a, b, c)` of the degenerate operator
//!
//! ```text
//! L u = u_t - sum_ij x_d a^ij u_{x_i x_j} - sum_i b^i u_{x_i} - c u
//! ```
//!
//! on the half-space `{x_d >= 0}`, with presets for the Heston operator and
//! the Daskalopoulos-Hamilton model operator, and a sampling validator for
//! the standing coefficient assumptions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::expr::{Expr, Var};
use crate::linalg::min_eigenvalue;
use crate::metric::{cycloidal, parabolic};

/// Declared structural constants of a coefficient field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMeta {
    /// Ellipticity lower bound of `a` near the boundary.
    pub delta: f64,
    /// Bound / Hölder constant.
    pub k: f64,
    /// Lower bound of `b^d` on `{x_d = 0}`.
    pub nu: f64,
    /// Hölder exponent in `(0, 1)`.
    pub alpha: f64,
}

/// Coefficients evaluated at one point. `a` is returned unscaled; the
/// operator multiplies it by `x_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Heston {
        kappa: f64,
        theta: f64,
        sigma: f64,
        rho: f64,
        r: f64,
        q: f64,
    },
    DhModel {
        nu: f64,
    },
    Constant,
    Custom,
}

/// Coefficient field of the operator, stored as expression trees so that
/// evaluation is exact and re-entrant.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    d: usize,
    a: Vec<Expr>,
    b: Vec<Expr>,
    c: Expr,
    pub meta: FieldMeta,
    pub kind: FieldKind,
}

impl CoefficientField {
    /// Builds a field from a full `d x d` expression matrix (row-major),
    /// a drift vector and a zeroth-order term. The matrix must be
    /// structurally symmetric.
    pub fn new(d: usize, a: Vec<Expr>, b: Vec<Expr>, c: Expr, meta: FieldMeta) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", "dimension must be at least 2"));
        }
        if a.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: a.len(),
            });
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if a[i * d + j] != a[j * d + i] {
                    return Err(Error::NonSymmetric(i, j));
                }
            }
        }
        let too_wide = a
            .iter()
            .chain(&b)
            .chain(std::iter::once(&c))
            .filter_map(Expr::max_coord)
            .any(|i| i >= d);
        if too_wide {
            return Err(invalid("expression", "references a coordinate beyond d"));
        }
        if !(meta.alpha > 0.0 && meta.alpha < 1.0) {
            return Err(invalid("alpha", "must lie in (0, 1)"));
        }
        Ok(CoefficientField {
            d,
            a,
            b,
            c,
            meta,
            kind: FieldKind::Custom,
        })
    }

    /// Constant coefficients.
    pub fn constant(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, alpha: f64) -> Result<Self> {
        let d = b.len();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.nrows(),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::NonSymmetric(i, j));
                }
            }
        }
        let entries: Vec<f64> = (0..d * d).map(|k| a[(k / d, k % d)]).collect();
        let delta = min_eigenvalue(d, &entries)?;
        let k = a.amax().max(b.amax()).max(c.abs()).max(1.0);
        let meta = FieldMeta {
            delta,
            k: k.max(d as f64 * a.amax()),
            nu: b[d - 1],
            alpha,
        };
        let mut f = CoefficientField::new(
            d,
            entries.into_iter().map(Expr::c).collect(),
            b.iter().copied().map(Expr::c).collect(),
            Expr::c(c),
            meta,
        )?;
        f.kind = FieldKind::Constant;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn a_expr(&self, i: usize, j: usize) -> &Expr {
        &self.a[i * self.d + j]
    }

    pub fn b_expr(&self, i: usize) -> &Expr {
        &self.b[i]
    }

    pub fn c_expr(&self) -> &Expr {
        &self.c
    }

    pub fn is_time_dependent(&self) -> bool {
        self.a
            .iter()
            .chain(&self.b)
            .chain(std::iter::once(&self.c))
            .any(|e| e.depends_on(Var::Time))
    }

    pub fn is_constant(&self) -> bool {
        self.a
            .iter()
            .chain(&self.b)
            .chain(std::iter::once(&self.c))
            .all(Expr::is_constant)
    }

    /// Checked evaluation of `(a, b, c)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Coefficients> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if !t.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evaluation point"));
        }
        if t < 0.0 {
            return Err(invalid("t", "time must be nonnegative"));
        }
        if x[self.d - 1] < 0.0 {
            return Err(Error::OutsideHalfSpace(x[self.d - 1]));
        }
        let mut a = vec![0.0; self.d * self.d];
        let mut b = vec![0.0; self.d];
        let c = self.eval_into(t, x, &mut a, &mut b);
        Ok(Coefficients {
            a: DMatrix::from_row_slice(self.d, self.d, &a),
            b: DVector::from_vec(b),
            c,
        })
    }

    /// Unchecked evaluation into caller buffers; returns `c`.
    pub fn eval_into(&self, t: f64, x: &[f64], a: &mut [f64], b: &mut [f64]) -> f64 {
        let d = self.d;
        for i in 0..d {
            for j in i..d {
                let v = self.a[i * d + j].eval(t, x);
                a[i * d + j] = v;
                a[j * d + i] = v;
            }
            b[i] = self.b[i].eval(t, x);
        }
        self.c.eval(t, x)
    }

    /// Applies `L` to a function given through its exact jet.
    pub fn apply(&self, t: f64, x: &[f64], jet: &crate::func::Jet) -> f64 {
        let d = self.d;
        let mut a = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        let c = self.eval_into(t, x, &mut a, &mut b);
        let xd = x[d - 1];
        let mut second = 0.0;
        for i in 0..d {
            for j in 0..d {
                second += a[i * d + j] * jet.hess[i * d + j];
            }
        }
        let first: f64 = (0..d).map(|i| b[i] * jet.grad[i]).sum();
        jet.dt - xd * second - first - c * jet.value
    }

    /// Symbolic `L u` for an expression `u`.
    pub fn apply_expr(&self, u: &Expr) -> Expr {
        let d = self.d;
        let xd = Expr::x(d - 1);
        let mut second = Expr::c(0.0);
        for i in 0..d {
            let ui = u.diff(Var::Coord(i));
            for j in 0..d {
                let uij = ui.diff(Var::Coord(j));
                second = second.add(self.a[i * d + j].clone().mul(uij));
            }
        }
        let mut first = Expr::c(0.0);
        for i in 0..d {
            first = first.add(self.b[i].clone().mul(u.diff(Var::Coord(i))));
        }
        u.diff(Var::Time)
            .sub(xd.mul(second))
            .sub(first)
            .sub(self.c.clone().mul(u.clone()))
    }

    /// The same field with `c` replaced by zero.
    pub fn without_zeroth_order(&self) -> CoefficientField {
        let mut f = self.clone();
        f.c = Expr::c(0.0);
        f
    }
}

/// Heston operator `(kappa, theta, sigma, rho, r, q)` on `(x, y)` with `y = x_2`.
pub fn heston_field(kappa: f64, theta: f64, sigma: f64, rho: f64, r: f64, q: f64) -> Result<CoefficientField> {
    let params = [kappa, theta, sigma, rho, r, q];
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("Heston parameter"));
    }
    if kappa <= 0.0 {
        return Err(invalid("kappa", "must be positive"));
    }
    if theta <= 0.0 {
        return Err(invalid("theta", "must be positive"));
    }
    if sigma <= 0.0 {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(invalid("rho", "must lie in (-1, 1); det a vanishes at |rho| = 1"));
    }
    if r < 0.0 {
        return Err(invalid("r", "must be nonnegative"));
    }
    if q < 0.0 {
        return Err(invalid("q", "must be nonnegative"));
    }
    let a11 = 0.5;
    let a12 = 0.5 * rho * sigma;
    let a22 = 0.5 * sigma * sigma;
    let delta = min_eigenvalue(2, &[a11, a12, a12, a22])?;
    let y = Expr::x(1);
    let b1 = Expr::c(r - q).sub(Expr::c(0.5).mul(y.clone()));
    let b2 = Expr::c(kappa).mul(Expr::c(theta).sub(y));

    // Sup of |a|+|b|+|c| on y in [0, 2]; s-Hölder constants of the
    // y-linear drifts (|dy| <= 5.1 s for s <= 1 near the boundary);
    // linear growth of the sum of |x_d a^ij| + |b^i| + |c|.
    let bound = a11.max(a12.abs()).max(a22) + ((r - q).abs() + 1.0).max(kappa * theta.max((theta - 2.0).abs())) + r;
    let holder = 5.1 * kappa.max(0.5);
    let growth = ((r - q).abs() + kappa * theta + r).max(a11 + 2.0 * a12.abs() + a22 + 0.5 + kappa);
    let meta = FieldMeta {
        delta,
        k: bound.max(holder).max(growth),
        nu: kappa * theta,
        alpha: 0.5,
    };
    let mut f = CoefficientField::new(
        2,
        vec![Expr::c(a11), Expr::c(a12), Expr::c(a12), Expr::c(a22)],
        vec![b1, b2],
        Expr::c(-r),
        meta,
    )?;
    f.kind = FieldKind::Heston {
        kappa,
        theta,
        sigma,
        rho,
        r,
        q,
    };
    Ok(f)
}

/// Model operator `-u_t + x_d Δu + ν u_{x_d}` in dimension `d`.
pub fn dh_model_field(nu: f64, d: usize) -> Result<CoefficientField> {
    if !nu.is_finite() || nu <= 0.0 {
        return Err(invalid("nu", "must be positive"));
    }
    if d < 2 {
        return Err(invalid("d", "dimension must be at least 2"));
    }
    let a = (0..d * d)
        .map(|k| Expr::c(if k / d == k % d { 1.0 } else { 0.0 }))
        .collect();
    let b = (0..d).map(|i| Expr::c(if i == d - 1 { nu } else { 0.0 })).collect();
    let meta = FieldMeta {
        delta: 1.0,
        k: (1.0 + nu).max(d as f64),
        nu,
        alpha: 0.5,
    };
    let mut f = CoefficientField::new(d, a, b, Expr::c(0.0), meta)?;
    f.kind = FieldKind::DhModel { nu };
    Ok(f)
}

/// Sampling box and budget for [`validate_assumptions`].
#[derive(Debug, Clone)]
pub struct Sampling {
    pub t_max: f64,
    /// Lateral half-width: `x_i` in `[-x_half_width, x_half_width]` for `i < d`.
    pub x_half_width: f64,
    /// Upper end of the `x_d` range `[0, y_max]`.
    pub y_max: f64,
    pub points: usize,
    pub pairs: usize,
    pub seed: u64,
    /// Ratio tolerated between estimated and declared constants.
    pub slack: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            t_max: 1.0,
            x_half_width: 2.0,
            y_max: 4.0,
            points: 2000,
            pairs: 4000,
            seed: 0,
            slack: 1.05,
        }
    }
}

/// Sampled estimates of the structural constants with pass flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub delta_hat: f64,
    pub delta_interior_hat: f64,
    pub k_hat: f64,
    pub c_sup_hat: f64,
    pub holder_s_hat: f64,
    pub holder_rho_hat: f64,
    pub growth_hat: f64,
    pub nu_hat: f64,
    pub ellipticity_ok: bool,
    pub interior_ellipticity_ok: bool,
    pub boundedness_ok: bool,
    pub zeroth_order_ok: bool,
    pub holder_ok: bool,
    pub growth_ok: bool,
    pub inward_drift_ok: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.ellipticity_ok
            && self.interior_ellipticity_ok
            && self.boundedness_ok
            && self.zeroth_order_ok
            && self.holder_ok
            && self.growth_ok
            && self.inward_drift_ok
    }

    /// `(name, estimate, pass)` triples in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64, bool)> {
        vec![
            ("ellipticity-near-boundary", self.delta_hat, self.ellipticity_ok),
            (
                "ellipticity-interior",
                self.delta_interior_hat,
                self.interior_ellipticity_ok,
            ),
            ("boundedness-near-boundary", self.k_hat, self.boundedness_ok),
            ("zeroth-order-upper-bound", self.c_sup_hat, self.zeroth_order_ok),
            ("holder-s-near-boundary", self.holder_s_hat, self.holder_ok),
            ("holder-rho-interior", self.holder_rho_hat, self.holder_ok),
            ("linear-growth", self.growth_hat, self.growth_ok),
            ("inward-drift", self.nu_hat, self.inward_drift_ok),
        ]
    }
}

struct Sample {
    t: f64,
    x: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

fn sample_at(field: &CoefficientField, t: f64, x: Vec<f64>) -> Sample {
    let d = field.dim();
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let c = field.eval_into(t, &x, &mut a, &mut b);
    Sample { t, x, a, b, c }
}

/// Largest Hölder quotient over coefficient components for a pair.
fn holder_quotient(p: &Sample, q: &Sample, dist: f64, alpha: f64, scale_by_xd: bool) -> f64 {
    let d = p.x.len();
    let (sp, sq) = if scale_by_xd {
        (p.x[d - 1], q.x[d - 1])
    } else {
        (1.0, 1.0)
    };
    let denom = dist.powf(alpha);
    let mut m = 0.0f64;
    for k in 0..d * d {
        m = m.max((sp * p.a[k] - sq * q.a[k]).abs() / denom);
    }
    for k in 0..d {
        m = m.max((p.b[k] - q.b[k]).abs() / denom);
    }
    m.max((p.c - q.c).abs() / denom)
}

/// Estimates the structural constants of `field` by seeded sampling and
/// compares them with the declared metadata.
pub fn validate_assumptions(field: &CoefficientField, s: &Sampling) -> Result<AssumptionReport> {
    if s.points < 2 || s.pairs < 2 {
        return Err(Error::EmptySample("sample counts must be at least 2"));
    }
    if !(s.t_max >= 0.0 && s.x_half_width >= 0.0 && s.y_max > 0.0) {
        return Err(Error::OutsideHalfSpace(s.y_max));
    }
    if !(s.slack >= 1.0) {
        return Err(invalid("slack", "must be at least 1"));
    }
    let d = field.dim();
    let alpha = field.meta.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let draw_point = |rng: &mut ChaCha8Rng, y_lo: f64, y_hi: f64| -> (f64, Vec<f64>) {
        let t = rng.gen::<f64>() * s.t_max;
        let mut x: Vec<f64> = (0..d - 1)
            .map(|_| (2.0 * rng.gen::<f64>() - 1.0) * s.x_half_width)
            .collect();
        x.push(y_lo + rng.gen::<f64>() * (y_hi - y_lo));
        (t, x)
    };

    let mut delta_hat = f64::INFINITY;
    let mut delta_int = f64::INFINITY;
    let mut k_hat = 0.0f64;
    let mut c_sup = f64::NEG_INFINITY;
    let mut growth = 0.0f64;
    let mut nu_hat = f64::INFINITY;
    let y_near = s.y_max.min(2.0);

    for n in 0..s.points {
        // Every fourth sample sits on the boundary to probe the inward drift.
        let (t, mut x) = draw_point(&mut rng, 0.0, s.y_max);
        if n % 4 == 0 {
            x[d - 1] = 0.0;
        }
        let smp = sample_at(field, t, x);
        let xd = smp.x[d - 1];
        if xd <= 2.0 {
            delta_hat = delta_hat.min(min_eigenvalue(d, &smp.a)?);
            let bound = smp.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                + smp.b.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                + smp.c.abs();
            k_hat = k_hat.max(bound);
        }
        if xd >= 2.0 {
            let scaled: Vec<f64> = smp.a.iter().map(|v| xd * v).collect();
            delta_int = delta_int.min(min_eigenvalue(d, &scaled)?);
        }
        if xd == 0.0 {
            nu_hat = nu_hat.min(smp.b[d - 1]);
        }
        c_sup = c_sup.max(smp.c);
        let norm_x = smp.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let total = smp.a.iter().map(|v| (xd * v).abs()).sum::<f64>()
            + smp.b.iter().map(|v| v.abs()).sum::<f64>()
            + smp.c.abs();
        growth = growth.max(total / (1.0 + norm_x));
    }

    // Hölder pairs: perturb a base sample so the metric cap is met.
    let mut holder_s = 0.0f64;
    let mut holder_rho = 0.0f64;
    for n in 0..s.pairs {
        let near = n % 2 == 0;
        let (y_lo, y_hi) = if near { (0.0, y_near) } else { (2.0, s.y_max.max(2.0)) };
        if !near && s.y_max <= 2.0 {
            continue;
        }
        let (t, x) = draw_point(&mut rng, y_lo, y_hi);
        let scale = 10f64.powf(-3.0 * rng.gen::<f64>());
        let mut t2 = t + scale * scale * (rng.gen::<f64>() - 0.5);
        if t2 < 0.0 {
            t2 = -t2;
        }
        let mut x2: Vec<f64> = x.iter().map(|v| v + scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        x2[d - 1] = x2[d - 1].clamp(y_lo, y_hi);
        let p = sample_at(field, t, x);
        let q = sample_at(field, t2, x2);
        if near {
            let dist = cycloidal(p.t, &p.x, q.t, &q.x);
            if dist > 0.0 && dist <= 1.0 {
                holder_s = holder_s.max(holder_quotient(&p, &q, dist, alpha, false));
            }
        } else {
            let dist = parabolic(p.t, &p.x, q.t, &q.x);
            if dist > 0.0 && dist <= 1.0 {
                holder_rho = holder_rho.max(holder_quotient(&p, &q, dist, alpha, true));
            }
        }
    }

    let nu_hat = if nu_hat.is_finite() { nu_hat.max(0.0) } else { 0.0 };
    let delta_hat = if delta_hat.is_finite() { delta_hat.max(0.0) } else { 0.0 };
    let delta_int = if delta_int.is_finite() { delta_int.max(0.0) } else { 0.0 };
    let meta = field.meta;
    let slack = s.slack;
    let c_report = c_sup.max(0.0);
    Ok(AssumptionReport {
        delta_hat,
        delta_interior_hat: delta_int,
        k_hat,
        c_sup_hat: c_report,
        holder_s_hat: holder_s,
        holder_rho_hat: holder_rho,
        growth_hat: growth,
        nu_hat,
        ellipticity_ok: delta_hat > 0.0 && delta_hat * slack >= meta.delta,
        interior_ellipticity_ok: s.y_max <= 2.0 || (delta_int > 0.0 && delta_int * slack >= meta.delta),
        boundedness_ok: k_hat <= meta.k * slack,
        zeroth_order_ok: c_sup <= meta.k * slack,
        holder_ok: holder_s <= meta.k * slack && holder_rho <= meta.k * slack,
        growth_ok: growth <= meta.k * slack,
        inward_drift_ok: nu_hat > 0.0 && nu_hat * slack >= meta.nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heston_coefficients_unit_case() {
        let f = heston_field(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let co = f.eval(0.3, &[0.7, 1.9]).unwrap();
        assert_eq!(co.a, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
        assert_eq!(co.b[0], -1.9 / 2.0);
        assert_eq!(co.b[1], 1.0 - 1.9);
        assert_eq!(co.c, 0.0);
    }

    #[test]
    fn heston_nu_is_kappa_theta() {
        let f = heston_field(2.0, 3.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(f.meta.nu, 6.0);
        assert_eq!(f.eval(0.0, &[0.0, 0.0]).unwrap().b[1], 6.0);
    }

    #[test]
    fn heston_rejects_boundary_correlation() {
        assert!(heston_field(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(heston_field(1.0, 1.0, 1.0, -1.0, 0.0, 0.0).is_err());
        assert!(heston_field(0.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(heston_field(1.0, 1.0, 1.0, 0.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn heston_determinant_positive_over_sweep() {
        for k in -99..=99 {
            let rho = k as f64 / 100.0;
            for sigma in [0.1, 0.5, 1.0, 2.5] {
                let f = heston_field(1.0, 1.0, sigma, rho, 0.0, 0.0).unwrap();
                let a = f.eval(0.0, &[0.0, 1.0]).unwrap().a;
                let det = a.determinant();
                let expected = sigma * sigma / 4.0 * (1.0 - rho * rho);
                assert!(det > 0.0);
                assert!((det - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dh_model_presets() {
        let f = dh_model_field(1.0, 2).unwrap();
        let co = f.eval(0.0, &[1.0, 2.0]).unwrap();
        assert_eq!(co.a, DMatrix::identity(2, 2));
        assert_eq!(co.b.as_slice(), &[0.0, 1.0]);
        assert_eq!(co.c, 0.0);
        let f3 = dh_model_field(3.0, 3).unwrap();
        assert_eq!(f3.eval(0.0, &[0.0, 0.0, 0.0]).unwrap().b.as_slice(), &[0.0, 0.0, 3.0]);
        assert!(dh_model_field(0.0, 2).is_err());
        assert!(dh_model_field(-1.0, 2).is_err());
    }

    #[test]
    fn effective_diffusion_vanishes_on_boundary() {
        let f = heston_field(1.0, 0.5, 1.0, 0.5, 0.1, 0.0).unwrap();
        let co = f.eval(0.0, &[0.4, 0.0]).unwrap();
        assert_eq!(co.a * 0.0, DMatrix::zeros(2, 2));
    }

    #[test]
    fn eval_rejects_bad_points() {
        let f = dh_model_field(1.0, 2).unwrap();
        assert!(matches!(f.eval(0.0, &[0.0, -1e-9]), Err(Error::OutsideHalfSpace(_))));
        assert!(matches!(f.eval(f64::NAN, &[0.0, 1.0]), Err(Error::NonFinite(_))));
        assert!(matches!(f.eval(0.0, &[f64::INFINITY, 1.0]), Err(Error::NonFinite(_))));
        assert!(f.eval(0.0, &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn custom_field_must_be_symmetric() {
        let meta = FieldMeta {
            delta: 1.0,
            k: 2.0,
            nu: 1.0,
            alpha: 0.5,
        };
        let a = vec![Expr::c(1.0), Expr::x(0), Expr::c(0.0), Expr::c(1.0)];
        let b = vec![Expr::c(0.0), Expr::c(1.0)];
        assert!(matches!(
            CoefficientField::new(2, a, b, Expr::c(0.0), meta),
            Err(Error::NonSymmetric(1, 0))
        ));
    }

    #[test]
    fn validate_dh_model_exact_constants() {
        let f = dh_model_field(1.0, 2).unwrap();
        let rep = validate_assumptions(&f, &Sampling::default()).unwrap();
        assert_eq!(rep.delta_hat, 1.0);
        assert_eq!(rep.nu_hat, 1.0);
        assert_eq!(rep.holder_s_hat, 0.0);
        // x_d * I varies in the interior, with quotient at most dist^(1 - alpha) <= 1.
        assert!(rep.holder_rho_hat > 0.0 && rep.holder_rho_hat <= 1.0);
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn validate_heston_example() {
        let f = heston_field(1.0, 0.5, 1.0, 0.5, 0.1, 0.0).unwrap();
        let rep = validate_assumptions(&f, &Sampling::default()).unwrap();
        assert!((rep.nu_hat - 0.5).abs() < 1e-15);
        assert!((rep.delta_hat - 0.25).abs() < 1e-15);
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn validate_flags_vanishing_inward_drift() {
        let meta = FieldMeta {
            delta: 1.0,
            k: 3.0,
            nu: 1.0,
            alpha: 0.5,
        };
        let a = vec![Expr::c(1.0), Expr::c(0.0), Expr::c(0.0), Expr::c(1.0)];
        let b = vec![Expr::c(0.0), Expr::x(1)];
        let f = CoefficientField::new(2, a, b, Expr::c(0.0), meta).unwrap();
        let rep = validate_assumptions(&f, &Sampling::default()).unwrap();
        assert_eq!(rep.nu_hat, 0.0);
        assert!(!rep.inward_drift_ok);
        assert!(!rep.all_pass());
    }

    #[test]
    fn validation_is_deterministic() {
        let f = heston_field(1.5, 0.4, 0.7, -0.3, 0.05, 0.01).unwrap();
        let s = Sampling {
            seed: 17,
            ..Sampling::default()
        };
        let a = validate_assumptions(&f, &s).unwrap();
        let b = validate_assumptions(&f, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validation_rejects_degenerate_sampling() {
        let f = dh_model_field(1.0, 2).unwrap();
        let s = Sampling {
            points: 1,
            ..Sampling::default()
        };
        assert!(matches!(validate_assumptions(&f, &s), Err(Error::EmptySample(_))));
    }

    #[test]
    fn symbolic_apply_matches_jet_apply() {
        let f = heston_field(1.2, 0.3, 0.8, 0.0, 0.05, 0.02).unwrap();
        let u = Expr::parse("exp(-t) * (1 + x2^2) * cos(x1)").unwrap();
        let lu = f.apply_expr(&u);
        let jet = u.clone().jet_of(2);
        for (t, x) in [(0.1, [0.2, 0.0]), (0.7, [-1.0, 1.3])] {
            let a = lu.eval(t, &x);
            let b = f.apply(t, &x, &crate::func::SmoothFn::jet(&jet, t, &x));
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_growth_constant_stable_in_sample_size() {
        let f = heston_field(1.0, 0.5, 1.0, 0.3, 0.05, 0.0).unwrap();
        let small = validate_assumptions(
            &f,
            &Sampling {
                points: 500,
                ..Sampling::default()
            },
        )
        .unwrap();
        let large = validate_assumptions(
            &f,
            &Sampling {
                points: 8000,
                ..Sampling::default()
            },
        )
        .unwrap();
        assert!(large.growth_hat >= small.growth_hat * 0.9);
        assert!(large.growth_hat <= small.growth_hat * 1.2);
        assert!(large.growth_hat <= f.meta.k);
    }
}
