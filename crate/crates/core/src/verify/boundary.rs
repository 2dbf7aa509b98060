//! Decay of `x_d D²u` near the degenerate boundary.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::{in_audit_region, CheckRow, Verdict};

/// `max |x_d u_{x_i x_j}|` over the first few interior `x_d` layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfile {
    /// `x_d` of each layer, starting at the first interior layer.
    pub heights: Vec<f64>,
    pub maxima: Vec<f64>,
}

impl LayerProfile {
    pub fn first(&self) -> (f64, f64) {
        (self.heights[0], self.maxima[0])
    }
}

/// Profile from finite-difference Hessians at grid nodes in the audited
/// region, over all time slices.
pub fn layer_profile(u: &GridFunction, layers: usize, margin: f64) -> Result<LayerProfile> {
    let g = &u.grid;
    let d = g.dim();
    let normal = &g.axes[d - 1];
    if layers == 0 || layers >= normal.len() {
        return Err(Error::EmptySample("layer count out of range"));
    }
    let fields = u.derivative_fields();
    let ns = g.n_space();
    let mut maxima = vec![0.0f64; layers];
    let mut seen = vec![false; layers];
    for k in 0..ns {
        let j = g.axis_index(k, d - 1);
        if j == 0 || j > layers {
            continue;
        }
        let x = g.node(k);
        if !in_audit_region(g, &x, margin) {
            continue;
        }
        seen[j - 1] = true;
        for n in 0..g.n_slices() {
            for h in &fields.hess {
                maxima[j - 1] = maxima[j - 1].max((x[d - 1] * h.at(n, k)).abs());
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::EmptySample("audited region misses a layer"));
    }
    Ok(LayerProfile {
        heights: normal[1..=layers].to_vec(),
        maxima,
    })
}

/// Pass iff the first-layer maximum strictly decreases at each refinement
/// and each step shrinks it by at least the first-order rate, up to a
/// factor of two: `new / old <= 2 x1_new / x1_old`.
pub fn boundary_vanishing_check(profiles: &[LayerProfile]) -> Result<Vec<CheckRow>> {
    if profiles.len() < 2 {
        return Err(Error::EmptySample("need at least two refinement levels"));
    }
    Ok(profiles
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (h0, m0) = w[0].first();
            let (h1, m1) = w[1].first();
            let bound = 2.0 * h1 / h0;
            let ratio = if m0 > 0.0 { m1 / m0 } else { f64::INFINITY };
            let mut row = CheckRow::new(
                format!("boundary-layer-{}-{}", k, k + 1),
                "boundary-vanishing",
                ratio,
                bound,
                1.0,
            );
            row.verdict = Verdict::from_bool(m1 < m0 && ratio <= bound);
            row
        })
        .collect())
}
