//! Hölder seminorms and weighted norms estimated on finite point sets.
//!
//! Every seminorm here is a supremum over evaluated pairs, so the reported
//! value is a lower bound of the true seminorm over the underlying region.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::func::{SmoothFn, SpaceTimeFn};
use crate::linalg::symmetric_eigen;
use crate::metric::{Metric, SpaceTimePoint};

/// Default cap on exhaustively enumerated pairs.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 50_000;

/// Space-time points stored flat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    d: usize,
    t: Vec<f64>,
    x: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize) -> Self {
        PointSet {
            d,
            t: Vec::new(),
            x: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.d);
        self.t.push(t);
        self.x.extend_from_slice(x);
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.t[k]
    }

    #[inline]
    pub fn x(&self, k: usize) -> &[f64] {
        &self.x[k * self.d..(k + 1) * self.d]
    }

    pub fn point(&self, k: usize) -> SpaceTimePoint {
        SpaceTimePoint::new(self.t[k], self.x(k).to_vec()).expect("stored points are valid")
    }

    /// Tensor lattice over the given time and per-axis coordinates.
    pub fn lattice(times: &[f64], axes: &[Vec<f64>]) -> Self {
        let d = axes.len();
        let mut ps = PointSet::new(d);
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        for &t in times {
            idx.iter_mut().for_each(|i| *i = 0);
            'outer: loop {
                for k in 0..d {
                    x[k] = axes[k][idx[k]];
                }
                ps.push(t, &x);
                for k in (0..d).rev() {
                    idx[k] += 1;
                    if idx[k] < axes[k].len() {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
        ps
    }

    /// Indices of points satisfying `pred(t, x)`.
    pub fn select<F: Fn(f64, &[f64]) -> bool>(&self, pred: F) -> Vec<usize> {
        (0..self.len()).filter(|&k| pred(self.t[k], self.x(k))).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> PointSet {
        let mut ps = PointSet::new(self.d);
        for &k in idx {
            ps.push(self.t[k], self.x(k));
        }
        ps
    }

    pub fn eval(&self, f: &dyn SpaceTimeFn) -> Vec<f64> {
        (0..self.len()).map(|k| f.eval(self.t[k], self.x(k))).collect()
    }

    /// Applies a spatial map to every point, keeping times.
    pub fn map_space<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> PointSet {
        let mut ps = PointSet::new(self.d);
        for k in 0..self.len() {
            ps.push(self.t[k], &f(self.x(k)));
        }
        ps
    }
}

/// Box (optionally intersected with a spatial ball about the origin) in space-time.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub t_range: (f64, f64),
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub radius: Option<f64>,
}

impl Region {
    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        if t < self.t_range.0 || t > self.t_range.1 {
            return false;
        }
        let inside_box = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        inside_box
            && self
                .radius
                .is_none_or(|r| x.iter().map(|v| v * v).sum::<f64>().sqrt() <= r)
    }

    pub fn describe(&self) -> String {
        let axes: Vec<String> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| format!("[{a},{b}]"))
            .collect();
        match self.radius {
            Some(r) => format!("t[{},{}] x{} |x|<={r}", self.t_range.0, self.t_range.1, axes.join("x")),
            None => format!("t[{},{}] x{}", self.t_range.0, self.t_range.1, axes.join("x")),
        }
    }
}

/// Pair enumeration budget.
#[derive(Debug, Clone, Copy)]
pub struct PairBudget {
    pub exhaustive_cap: usize,
    /// Pairs drawn when the exhaustive count exceeds the cap.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PairBudget {
    fn default() -> Self {
        PairBudget {
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            samples: DEFAULT_EXHAUSTIVE_CAP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormEstimate {
    pub value: f64,
    /// Indices of the maximising pair.
    pub argmax: Option<(usize, usize)>,
    pub n_pairs: usize,
    pub exhaustive: bool,
}

impl SeminormEstimate {
    fn empty() -> Self {
        SeminormEstimate {
            value: 0.0,
            argmax: None,
            n_pairs: 0,
            exhaustive: true,
        }
    }
}

type Best = (f64, usize, usize);

/// Max with ties broken toward the lexicographically smallest pair, so
/// the reduction is independent of how pairs are partitioned.
#[inline]
fn better(a: Best, b: Best) -> Best {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

#[inline]
fn quotient(points: &PointSet, values: &[f64], i: usize, j: usize, alpha: f64, metric: Metric) -> f64 {
    let dist = metric.distance(points.t(i), points.x(i), points.t(j), points.x(j));
    if dist == 0.0 {
        return 0.0;
    }
    (values[i] - values[j]).abs() / dist.powf(alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1)"));
    }
    Ok(())
}

/// Hölder seminorm estimate `sup |f(P1) - f(P2)| / dist(P1, P2)^alpha`.
///
/// Exhaustive over all pairs when their number is at most
/// `budget.exhaustive_cap`, otherwise over `budget.samples` seeded pairs.
pub fn holder_seminorm(
    points: &PointSet,
    values: &[f64],
    alpha: f64,
    metric: Metric,
    budget: &PairBudget,
) -> Result<SeminormEstimate> {
    check_alpha(alpha)?;
    if points.len() < 2 {
        return Err(Error::EmptySample("need at least two points"));
    }
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("function value"));
    }
    Ok(seminorm_unchecked(points, values, alpha, metric, budget))
}

fn seminorm_unchecked(
    points: &PointSet,
    values: &[f64],
    alpha: f64,
    metric: Metric,
    budget: &PairBudget,
) -> SeminormEstimate {
    let n = points.len();
    if n < 2 {
        return SeminormEstimate::empty();
    }
    let total_pairs = n * (n - 1) / 2;
    let init: Best = (0.0, usize::MAX, usize::MAX);
    if total_pairs <= budget.exhaustive_cap {
        let best = (0..n - 1)
            .into_par_iter()
            .map(|i| {
                let mut b = init;
                for j in (i + 1)..n {
                    b = better(b, (quotient(points, values, i, j, alpha, metric), i, j));
                }
                b
            })
            .reduce(|| init, better);
        return finish(best, total_pairs, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let pairs: Vec<(usize, usize)> = (0..budget.samples)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();
    let best = pairs
        .par_iter()
        .map(|&(i, j)| (quotient(points, values, i, j, alpha, metric), i, j))
        .reduce(|| init, better);
    finish(best, pairs.len(), false)
}

fn finish(best: Best, n_pairs: usize, exhaustive: bool) -> SeminormEstimate {
    SeminormEstimate {
        value: best.0,
        argmax: if best.1 == usize::MAX {
            None
        } else {
            Some((best.1, best.2))
        },
        n_pairs,
        exhaustive,
    }
}

/// `(sup |f|, [f]_alpha)` over a point set in one metric.
pub fn alpha_norm(
    points: &PointSet,
    values: &[f64],
    alpha: f64,
    metric: Metric,
    budget: &PairBudget,
) -> Result<(f64, SeminormEstimate)> {
    let semi = holder_seminorm(points, values, alpha, metric, budget)?;
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((sup, semi))
}

/// Order of a norm report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    Alpha,
    TwoPlusAlpha,
}

impl Order {
    pub fn tag(self) -> &'static str {
        match self {
            Order::Zero => "0",
            Order::Alpha => "alpha",
            Order::TwoPlusAlpha => "2+alpha",
        }
    }
}

/// Second-order term used on the far piece `{x_d >= 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondOrderForm {
    /// `x_d u_{x_i x_j}` on both pieces (weighted spaces).
    Degenerate,
    /// `x_d u_{x_i x_j}` near the boundary, `u_{x_i x_j}` away from it.
    Split,
}

/// Pointwise samples of a function and, optionally, its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSamples {
    pub value: Vec<f64>,
    pub dt: Vec<f64>,
    /// `grad[i][k]` = `u_{x_i}` at point `k`.
    pub grad: Vec<Vec<f64>>,
    /// `hess[i * d + j][k]` = `u_{x_i x_j}` at point `k`.
    pub hess: Vec<Vec<f64>>,
}

impl JetSamples {
    pub fn from_smooth(f: &dyn SmoothFn, points: &PointSet) -> Self {
        let d = points.dim();
        let n = points.len();
        let mut s = JetSamples {
            value: Vec::with_capacity(n),
            dt: Vec::with_capacity(n),
            grad: vec![Vec::with_capacity(n); d],
            hess: vec![Vec::with_capacity(n); d * d],
        };
        for k in 0..n {
            let jet = f.jet(points.t(k), points.x(k));
            s.value.push(jet.value);
            s.dt.push(jet.dt);
            for i in 0..d {
                s.grad[i].push(jet.grad[i]);
            }
            for ij in 0..d * d {
                s.hess[ij].push(jet.hess[ij]);
            }
        }
        s
    }

    pub fn scaled(&self, c: f64) -> JetSamples {
        let sc = |v: &Vec<f64>| v.iter().map(|a| a * c).collect::<Vec<_>>();
        JetSamples {
            value: sc(&self.value),
            dt: sc(&self.dt),
            grad: self.grad.iter().map(sc).collect(),
            hess: self.hess.iter().map(sc).collect(),
        }
    }
}

/// What a weighted norm is computed from.
#[derive(Debug, Clone, Copy)]
pub enum FieldSamples<'a> {
    Values(&'a [f64]),
    Jets(&'a JetSamples),
}

/// Sup and seminorm of one quantity on one piece of the split region.
#[derive(Debug, Clone, PartialEq)]
pub struct TermNorm {
    pub label: String,
    pub sup: f64,
    pub seminorm: f64,
    pub n_pairs: usize,
    pub argmax: Option<(SpaceTimePoint, SpaceTimePoint)>,
}

impl TermNorm {
    pub fn total(&self) -> f64 {
        self.sup + self.seminorm
    }
}

/// Norm pieces on one side of the split at `x_d = 1` in one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub metric: Metric,
    pub alpha: f64,
    pub q: f64,
    pub order: Order,
    pub region: String,
    /// Weighted sup of the function itself on this piece.
    pub sup_norm: f64,
    /// Weighted seminorm of the function itself on this piece.
    pub seminorm: f64,
    /// `sup_norm + seminorm` for order `α`; sum of all term norms for `2+α`.
    pub full_norm: f64,
    pub n_pairs: usize,
    pub argmax: Option<(SpaceTimePoint, SpaceTimePoint)>,
    /// Derivative terms (`u_t`, `u_{x_i}`, second-order) for order `2+α`.
    pub terms: Vec<TermNorm>,
}

impl HolderReport {
    pub const CSV_HEADER: [&'static str; 9] = [
        "metric",
        "alpha",
        "q",
        "sup",
        "seminorm",
        "total",
        "n_pairs",
        "argmax_p1",
        "argmax_p2",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let fmt_pt = |p: &SpaceTimePoint| {
            let mut parts = vec![crate::io::fmt_f64(p.t())];
            parts.extend(p.x().iter().map(|v| crate::io::fmt_f64(*v)));
            parts.join(";")
        };
        let (p1, p2) = match &self.argmax {
            Some((a, b)) => (fmt_pt(a), fmt_pt(b)),
            None => (String::new(), String::new()),
        };
        vec![
            self.metric.tag().to_string(),
            crate::io::fmt_f64(self.alpha),
            crate::io::fmt_f64(self.q),
            crate::io::fmt_f64(self.sup_norm),
            crate::io::fmt_f64(self.seminorm),
            crate::io::fmt_f64(self.full_norm),
            self.n_pairs.to_string(),
            p1,
            p2,
        ]
    }
}

/// Weighted norm over a region split at `x_d = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNorm {
    pub order: Order,
    pub q: f64,
    pub alpha: f64,
    /// Weighted sup of the function (the `𝒞^0_q` term).
    pub sup: f64,
    pub total: f64,
    /// Near piece (cycloidal) then far piece (parabolic).
    pub pieces: Vec<HolderReport>,
}

#[inline]
fn weight(x: &[f64], q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powf(q)
    }
}

struct Piece {
    metric: Metric,
    idx: Vec<usize>,
    points: PointSet,
    label: &'static str,
}

fn term_norm(label: String, piece: &Piece, values: &[f64], alpha: f64, budget: &PairBudget) -> TermNorm {
    let local: Vec<f64> = piece.idx.iter().map(|&k| values[k]).collect();
    let sup = local.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let semi = seminorm_unchecked(&piece.points, &local, alpha, piece.metric, budget);
    TermNorm {
        label,
        sup,
        seminorm: semi.value,
        n_pairs: semi.n_pairs,
        argmax: semi.argmax.map(|(i, j)| (piece.points.point(i), piece.points.point(j))),
    }
}

/// Weighted norm `‖·‖_{𝒞^k_q}` of sampled data over `points`.
///
/// The near piece `{x_d <= 1}` uses the cycloidal seminorm, the far piece
/// `{x_d >= 1}` the parabolic one; every quantity is multiplied by
/// `(1 + |x|)^q` before the sup and seminorms are taken.
pub fn weighted_norm(
    points: &PointSet,
    samples: FieldSamples<'_>,
    q: f64,
    order: Order,
    alpha: f64,
    second_order: SecondOrderForm,
    budget: &PairBudget,
) -> Result<WeightedNorm> {
    check_alpha(alpha)?;
    if !(q >= 0.0) {
        return Err(invalid("q", "weight exponent must be nonnegative"));
    }
    if points.is_empty() {
        return Err(Error::EmptySample("no points in region"));
    }
    let d = points.dim();
    let n = points.len();
    let value = match samples {
        FieldSamples::Values(v) => v,
        FieldSamples::Jets(j) => &j.value[..],
    };
    if value.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: value.len(),
        });
    }
    if value.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("function value"));
    }
    let jets = match (order, samples) {
        (Order::TwoPlusAlpha, FieldSamples::Jets(j)) => Some(j),
        (Order::TwoPlusAlpha, FieldSamples::Values(_)) => return Err(Error::MissingDerivatives),
        _ => None,
    };
    let weights: Vec<f64> = (0..n).map(|k| weight(points.x(k), q)).collect();
    let weighted = |v: &[f64]| -> Vec<f64> { v.iter().zip(&weights).map(|(a, w)| a * w).collect() };

    let wu = weighted(value);
    let sup = wu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if order == Order::Zero {
        return Ok(WeightedNorm {
            order,
            q,
            alpha,
            sup,
            total: sup,
            pieces: Vec::new(),
        });
    }

    let near_idx = points.select(|_, x| x[d - 1] <= 1.0);
    let far_idx = points.select(|_, x| x[d - 1] >= 1.0);
    let pieces = [
        Piece {
            metric: Metric::Cycloidal,
            points: points.subset(&near_idx),
            idx: near_idx,
            label: "near",
        },
        Piece {
            metric: Metric::Parabolic,
            points: points.subset(&far_idx),
            idx: far_idx,
            label: "far",
        },
    ];

    // Per quantity: (label, weighted values, is-max-group id)
    let mut quantities: Vec<(String, Vec<f64>, usize)> = vec![("u".into(), wu, 0)];
    if let Some(j) = jets {
        quantities.push(("u_t".into(), weighted(&j.dt), 1));
        for i in 0..d {
            quantities.push((format!("u_x{}", i + 1), weighted(&j.grad[i]), 2));
        }
    }

    let mut reports = Vec::with_capacity(2);
    // Sum over quantity groups of (sup + near seminorm + far seminorm), with a max inside groups.
    let mut group_totals = [0.0f64; 4];
    let mut group_seen = [false; 4];

    let mut per_piece_terms: Vec<Vec<TermNorm>> = vec![Vec::new(), Vec::new()];
    let mut second: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    if let Some(j) = jets {
        for i in 0..d {
            for jj in i..d {
                let raw = &j.hess[i * d + jj];
                let degenerate: Vec<f64> = (0..n).map(|k| points.x(k)[d - 1] * raw[k]).collect();
                let far_values = match second_order {
                    SecondOrderForm::Degenerate => degenerate.clone(),
                    SecondOrderForm::Split => raw.clone(),
                };
                second.push((
                    format!("u_x{}x{}", i + 1, jj + 1),
                    weighted(&degenerate),
                    weighted(&far_values),
                ));
            }
        }
    }

    for (qi, (label, vals, group)) in quantities.iter().enumerate() {
        let mut tot_semis = [0.0; 2];
        for (pi, piece) in pieces.iter().enumerate() {
            let tn = term_norm(label.clone(), piece, vals, alpha, budget);
            tot_semis[pi] = tn.seminorm;
            if qi > 0 {
                per_piece_terms[pi].push(tn);
            } else {
                per_piece_terms[pi].insert(0, tn);
            }
        }
        let s = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let total = s + tot_semis[0] + tot_semis[1];
        if !group_seen[*group] || total > group_totals[*group] {
            group_totals[*group] = total;
        }
        group_seen[*group] = true;
    }
    for (label, near_vals, far_vals) in &second {
        let near_tn = term_norm(format!("xd*{label}"), &pieces[0], near_vals, alpha, budget);
        let far_label = match second_order {
            SecondOrderForm::Degenerate => format!("xd*{label}"),
            SecondOrderForm::Split => label.clone(),
        };
        let far_tn = term_norm(far_label, &pieces[1], far_vals, alpha, budget);
        let s = pieces[0]
            .idx
            .iter()
            .map(|&k| near_vals[k].abs())
            .chain(pieces[1].idx.iter().map(|&k| far_vals[k].abs()))
            .fold(0.0f64, f64::max);
        let total = s + near_tn.seminorm + far_tn.seminorm;
        if !group_seen[3] || total > group_totals[3] {
            group_totals[3] = total;
        }
        group_seen[3] = true;
        per_piece_terms[0].push(near_tn);
        per_piece_terms[1].push(far_tn);
    }
    let total: f64 = group_totals
        .iter()
        .zip(&group_seen)
        .filter(|(_, seen)| **seen)
        .map(|(t, _)| *t)
        .sum();

    for (pi, piece) in pieces.iter().enumerate() {
        let terms = std::mem::take(&mut per_piece_terms[pi]);
        let head = terms[0].clone();
        let full_norm = if order == Order::Alpha {
            head.total()
        } else {
            // u, u_t, max_i u_{x_i}, max_ij second-order term, restricted to this piece.
            let mut best = [0.0f64; 4];
            for tn in &terms {
                let g = if tn.label == "u" {
                    0
                } else if tn.label == "u_t" {
                    1
                } else if tn.label.starts_with("u_x") && !tn.label[3..].contains('x') {
                    2
                } else {
                    3
                };
                best[g] = best[g].max(tn.total());
            }
            best.iter().sum()
        };
        let n_pairs = terms.iter().map(|t| t.n_pairs).max().unwrap_or(0);
        reports.push(HolderReport {
            metric: piece.metric,
            alpha,
            q,
            order,
            region: piece.label.to_string(),
            sup_norm: head.sup,
            seminorm: head.seminorm,
            full_norm,
            n_pairs,
            argmax: head.argmax.clone(),
            terms: if order == Order::TwoPlusAlpha {
                terms[1..].to_vec()
            } else {
                Vec::new()
            },
        });
    }

    Ok(WeightedNorm {
        order,
        q,
        alpha,
        sup,
        total,
        pieces: reports,
    })
}

/// `‖u‖_{C^{2+α}_s}` over a whole point set in the cycloidal metric, plus
/// the pieces reused by the interpolation checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CycloidalNorms {
    pub sup_u: f64,
    pub alpha_u: f64,
    pub sup_grad: f64,
    pub alpha_xd_grad: f64,
    pub sup_xd_hess: f64,
    pub two_alpha: f64,
}

pub fn cycloidal_norms(
    points: &PointSet,
    jets: &JetSamples,
    alpha: f64,
    budget: &PairBudget,
) -> Result<CycloidalNorms> {
    let d = points.dim();
    let n = points.len();
    let m = Metric::Cycloidal;
    let norm = |v: &[f64]| -> Result<f64> {
        let (s, semi) = alpha_norm(points, v, alpha, m, budget)?;
        Ok(s + semi.value)
    };
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let xd: Vec<f64> = (0..n).map(|k| points.x(k)[d - 1]).collect();
    let alpha_u = norm(&jets.value)?;
    let alpha_ut = norm(&jets.dt)?;
    let mut grad_alpha = 0.0f64;
    let mut sup_grad = 0.0f64;
    let mut alpha_xd_grad = 0.0f64;
    for i in 0..d {
        grad_alpha = grad_alpha.max(norm(&jets.grad[i])?);
        sup_grad = sup_grad.max(sup(&jets.grad[i]));
        let xg: Vec<f64> = jets.grad[i].iter().zip(&xd).map(|(g, y)| g * y).collect();
        alpha_xd_grad = alpha_xd_grad.max(norm(&xg)?);
    }
    let mut hess_alpha = 0.0f64;
    let mut sup_xd_hess = 0.0f64;
    for i in 0..d {
        for j in i..d {
            let xh: Vec<f64> = jets.hess[i * d + j].iter().zip(&xd).map(|(h, y)| h * y).collect();
            hess_alpha = hess_alpha.max(norm(&xh)?);
            sup_xd_hess = sup_xd_hess.max(sup(&xh));
        }
    }
    Ok(CycloidalNorms {
        sup_u: sup(&jets.value),
        alpha_u,
        sup_grad,
        alpha_xd_grad,
        sup_xd_hess,
        two_alpha: alpha_u + alpha_ut + grad_alpha + hess_alpha,
    })
}

/// Outcome of comparing Hölder norms of `w1` and `w2 = w1(t, Mx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCheck {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub norm_w1: f64,
    pub norm_w2: f64,
    pub seminorm_w1: f64,
    pub seminorm_w2: f64,
    /// `‖w1‖` against `(1 + λ_min^{-α}) ‖w2‖`.
    pub lhs1: f64,
    pub rhs1: f64,
    /// `‖w2‖` against `(1 + λ_max^α) ‖w1‖`.
    pub lhs2: f64,
    pub rhs2: f64,
    /// Smallest `C` making both inequalities hold.
    pub fitted_c: f64,
    pub pass: bool,
}

/// Compares parabolic Hölder norms of `w1` and `w2(t, x) = w1(t, Mx)`.
///
/// `w2` is evaluated on `grid`; `w1` on the image `M · grid`, so the sup
/// norms coincide and only the seminorms move.
pub fn holder_transform_check(
    w1: &dyn SpaceTimeFn,
    m: &DMatrix<f64>,
    alpha: f64,
    grid: &PointSet,
    c_cap: f64,
    budget: &PairBudget,
) -> Result<TransformCheck> {
    check_alpha(alpha)?;
    let d = grid.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.nrows(),
        });
    }
    let eig = symmetric_eigen(m)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    let image = grid.map_space(|x| {
        let v = m * nalgebra::DVector::from_column_slice(x);
        v.iter().copied().collect()
    });
    let v1 = image.eval(w1);
    let v2: Vec<f64> = v1.clone();
    let (sup1, semi1) = alpha_norm(&image, &v1, alpha, Metric::Parabolic, budget)?;
    let (sup2, semi2) = alpha_norm(grid, &v2, alpha, Metric::Parabolic, budget)?;
    let n1 = sup1 + semi1.value;
    let n2 = sup2 + semi2.value;
    let (lmin, lmax) = (eig.min(), eig.max());
    let f1 = (1.0 + lmin.powf(-alpha)) * n2;
    let f2 = (1.0 + lmax.powf(alpha)) * n1;
    let c1 = if f1 > 0.0 { n1 / f1 } else { 0.0 };
    let c2 = if f2 > 0.0 { n2 / f2 } else { 0.0 };
    let fitted = c1.max(c2);
    Ok(TransformCheck {
        lambda_min: lmin,
        lambda_max: lmax,
        norm_w1: n1,
        norm_w2: n2,
        seminorm_w1: semi1.value,
        seminorm_w2: semi2.value,
        lhs1: n1,
        rhs1: fitted * f1,
        lhs2: n2,
        rhs2: fitted * f2,
        fitted_c: fitted,
        pass: fitted <= c_cap,
    })
}
