//! Cycloidal and parabolic Euclidean distances between space-time points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// A point `(t, x)` with `t >= 0` and `x_d >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint {
    t: f64,
    x: Vec<f64>,
}

impl SpaceTimePoint {
    pub fn new(t: f64, x: Vec<f64>) -> Result<Self> {
        if !t.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("space-time point"));
        }
        if x.is_empty() {
            return Err(invalid("x", "empty coordinate vector"));
        }
        if t < 0.0 {
            return Err(invalid("t", "time must be nonnegative"));
        }
        let xd = x[x.len() - 1];
        if xd < 0.0 {
            return Err(Error::OutsideHalfSpace(xd));
        }
        Ok(SpaceTimePoint { t, x })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Which distance a Hölder quotient is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Cycloidal distance `s`.
    Cycloidal,
    /// Parabolic Euclidean distance `ρ`.
    Parabolic,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::Cycloidal => "s",
            Metric::Parabolic => "rho",
        }
    }

    #[inline]
    pub fn distance(self, t1: f64, x1: &[f64], t2: f64, x2: &[f64]) -> f64 {
        match self {
            Metric::Cycloidal => cycloidal(t1, x1, t2, x2),
            Metric::Parabolic => parabolic(t1, x1, t2, x2),
        }
    }
}

/// Unchecked cycloidal distance.
///
/// The spatial term is defined as zero when both the numerator and the
/// denominator vanish (both points on `{x_d = 0}` with equal `x'`).
#[inline]
pub fn cycloidal(t1: f64, x1: &[f64], t2: f64, x2: &[f64]) -> f64 {
    let d = x1.len();
    let mut lateral = 0.0;
    for i in 0..d - 1 {
        lateral += (x1[i] - x2[i]).abs();
    }
    let numerator = lateral + (x1[d - 1] - x2[d - 1]).abs();
    let spatial = if numerator == 0.0 {
        0.0
    } else {
        numerator / (x1[d - 1].sqrt() + x2[d - 1].sqrt() + lateral.sqrt())
    };
    spatial + (t1 - t2).abs().sqrt()
}

/// Unchecked parabolic Euclidean distance `Σ|Δx_i| + sqrt|Δt|`.
#[inline]
pub fn parabolic(t1: f64, x1: &[f64], t2: f64, x2: &[f64]) -> f64 {
    let spatial: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b).abs()).sum();
    spatial + (t1 - t2).abs().sqrt()
}

fn check_pair(p1: &SpaceTimePoint, p2: &SpaceTimePoint) -> Result<()> {
    if p1.dim() != p2.dim() {
        return Err(Error::DimensionMismatch {
            expected: p1.dim(),
            got: p2.dim(),
        });
    }
    Ok(())
}

pub fn cycloidal_distance(p1: &SpaceTimePoint, p2: &SpaceTimePoint) -> Result<f64> {
    check_pair(p1, p2)?;
    Ok(cycloidal(p1.t, &p1.x, p2.t, &p2.x))
}

pub fn parabolic_distance(p1: &SpaceTimePoint, p2: &SpaceTimePoint) -> Result<f64> {
    check_pair(p1, p2)?;
    Ok(parabolic(p1.t, &p1.x, p2.t, &p2.x))
}

/// How [`PairSampler`] separates the two points of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMode {
    /// Independent uniform points in the box.
    Uniform,
    /// Same spatial point, different times.
    TimeOnly,
    /// Same time, spatial offsets up to `max_step` per coordinate.
    SpatialOnly { max_step: f64 },
    /// Random perturbations of a uniform base point at log-uniform scales.
    Local { max_step: f64 },
}

/// Seeded sampler of point pairs in `[0, t_max] x [-w, w]^{d-1} x [y0, y1]`.
#[derive(Debug, Clone)]
pub struct PairSampler {
    pub d: usize,
    pub t_max: f64,
    pub half_width: f64,
    pub mode: PairMode,
    pub count: usize,
    pub seed: u64,
}

/// Flat storage of sampled pairs: `t1, x1, t2, x2` per pair.
#[derive(Debug, Clone)]
pub struct PairSet {
    pub d: usize,
    pub t: Vec<[f64; 2]>,
    pub x: Vec<f64>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn pair(&self, k: usize) -> (f64, &[f64], f64, &[f64]) {
        let d = self.d;
        let base = 2 * d * k;
        (
            self.t[k][0],
            &self.x[base..base + d],
            self.t[k][1],
            &self.x[base + d..base + 2 * d],
        )
    }
}

impl PairSampler {
    pub fn sample(&self, y0: f64, y1: f64) -> PairSet {
        let d = self.d;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = PairSet {
            d,
            t: Vec::with_capacity(self.count),
            x: Vec::with_capacity(2 * d * self.count),
        };
        let w = self.half_width;
        let clamp = |v: f64, i: usize| {
            if i == d - 1 {
                v.clamp(y0, y1)
            } else {
                v.clamp(-w, w)
            }
        };
        while out.t.len() < self.count {
            let t1 = rng.gen::<f64>() * self.t_max;
            let x1: Vec<f64> = (0..d)
                .map(|i| {
                    if i == d - 1 {
                        y0 + rng.gen::<f64>() * (y1 - y0)
                    } else {
                        (2.0 * rng.gen::<f64>() - 1.0) * w
                    }
                })
                .collect();
            let (t2, x2): (f64, Vec<f64>) = match self.mode {
                PairMode::Uniform => {
                    let t2 = rng.gen::<f64>() * self.t_max;
                    let x2 = (0..d)
                        .map(|i| {
                            if i == d - 1 {
                                y0 + rng.gen::<f64>() * (y1 - y0)
                            } else {
                                (2.0 * rng.gen::<f64>() - 1.0) * w
                            }
                        })
                        .collect();
                    (t2, x2)
                }
                PairMode::TimeOnly => (rng.gen::<f64>() * self.t_max, x1.clone()),
                PairMode::SpatialOnly { max_step } => {
                    let x2 = x1
                        .iter()
                        .enumerate()
                        .map(|(i, v)| clamp(v + max_step * (2.0 * rng.gen::<f64>() - 1.0), i))
                        .collect();
                    (t1, x2)
                }
                PairMode::Local { max_step } => {
                    let scale = max_step * 10f64.powf(-4.0 * rng.gen::<f64>());
                    let t2 = (t1 + scale * scale * (2.0 * rng.gen::<f64>() - 1.0)).clamp(0.0, self.t_max);
                    let x2 = x1
                        .iter()
                        .enumerate()
                        .map(|(i, v)| clamp(v + scale * (2.0 * rng.gen::<f64>() - 1.0), i))
                        .collect();
                    (t2, x2)
                }
            };
            if t1 == t2 && x1 == x2 {
                continue;
            }
            out.t.push([t1, t2]);
            out.x.extend_from_slice(&x1);
            out.x.extend_from_slice(&x2);
        }
        out
    }
}

/// Empirical `(min, max)` of `s/ρ` over sampled pairs in the slab
/// `x_d ∈ [y0, y1]`.
pub fn slab_equivalence_constants(y0: f64, y1: f64, sampler: &PairSampler) -> Result<(f64, f64)> {
    if !(y0 > 0.0) {
        return Err(invalid("y0", "slab must stay away from the boundary (y0 > 0)"));
    }
    if !(y1 > y0) || !y1.is_finite() {
        return Err(invalid("y1", "need y0 < y1 < inf"));
    }
    let pairs = sampler.sample(y0, y1);
    if pairs.is_empty() {
        return Err(Error::EmptySample("no pairs sampled"));
    }
    Ok(slab_ratio_range(&pairs))
}

/// `(min, max)` of `s/ρ` over a fixed pair set.
pub fn slab_ratio_range(pairs: &PairSet) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for k in 0..pairs.len() {
        let (t1, x1, t2, x2) = pairs.pair(k);
        let r = cycloidal(t1, x1, t2, x2) / parabolic(t1, x1, t2, x2);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Closed-form envelope of `s/ρ` on a slab `[y0, y1]` whose lateral
/// separations satisfy `Σ_{i<d}|Δx_i| <= lateral_span`.
pub fn slab_ratio_envelope(y0: f64, y1: f64, lateral_span: f64) -> (f64, f64) {
    let lower = (1.0 / (2.0 * y1.sqrt() + lateral_span.sqrt())).min(1.0);
    let upper = (1.0 / (2.0 * y0.sqrt())).max(1.0);
    (lower, upper)
}
