//! Tensor grids on the truncated half-cylinder and functions sampled on them.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::func::{Jet, SpaceTimeFn};
use crate::holder::{JetSamples, PointSet};
use crate::io::{read_grid, write_grid, GridData};

/// Node placement along `x_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Uniform,
    /// `x_d = Y (j / (n - 1))^2`, refined toward the boundary.
    Graded,
}

/// Parameters of a computational grid `[0, T] x [-X, X]^(d-1) x [0, Y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    pub t_max: f64,
    /// Number of time steps; the grid carries `n_t + 1` slices.
    pub n_t: usize,
    pub x_half_width: f64,
    pub n_lateral: usize,
    pub y_max: f64,
    pub n_normal: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    pub times: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    n_space: usize,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.d < 1 {
            return Err(invalid("d", "must be at least 1"));
        }
        if !(spec.t_max > 0.0 && spec.t_max.is_finite()) || spec.n_t < 1 {
            return Err(invalid("time", "need T > 0 and at least one step"));
        }
        if !(spec.y_max > 0.0 && spec.y_max.is_finite()) || spec.n_normal < 3 {
            return Err(invalid("y", "need Y > 0 and at least three normal nodes"));
        }
        if spec.d > 1 && (!(spec.x_half_width > 0.0 && spec.x_half_width.is_finite()) || spec.n_lateral < 3) {
            return Err(invalid("x", "need X > 0 and at least three lateral nodes"));
        }
        let times = (0..=spec.n_t)
            .map(|n| spec.t_max * n as f64 / spec.n_t as f64)
            .collect();
        let mut axes = Vec::with_capacity(spec.d);
        for _ in 0..spec.d - 1 {
            let n = spec.n_lateral;
            axes.push(
                (0..n)
                    .map(|i| -spec.x_half_width + 2.0 * spec.x_half_width * i as f64 / (n - 1) as f64)
                    .collect(),
            );
        }
        let nn = spec.n_normal;
        axes.push(
            (0..nn)
                .map(|j| {
                    let s = j as f64 / (nn - 1) as f64;
                    match spec.spacing {
                        Spacing::Uniform => spec.y_max * s,
                        Spacing::Graded => spec.y_max * s * s,
                    }
                })
                .collect(),
        );
        Ok(Self::from_axes(spec, times, axes))
    }

    fn from_axes(spec: GridSpec, times: Vec<f64>, axes: Vec<Vec<f64>>) -> Self {
        let d = axes.len();
        let mut strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        let n_space = axes.iter().map(Vec::len).product();
        Grid {
            spec,
            times,
            axes,
            strides,
            n_space,
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn n_slices(&self) -> usize {
        self.times.len()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Per-axis index of a flat spatial index.
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (a, s) in self.strides.iter().enumerate() {
            idx[a] = k / s;
            k %= s;
        }
        idx
    }

    #[inline]
    pub fn axis_index(&self, k: usize, axis: usize) -> usize {
        (k / self.strides[axis]) % self.axes[axis].len()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.node_into(k, &mut x);
        x
    }

    pub fn node_into(&self, k: usize, x: &mut [f64]) {
        for (a, axis) in self.axes.iter().enumerate() {
            x[a] = axis[self.axis_index(k, a)];
        }
    }

    /// Node on the lateral faces or the top face `x_d = Y`.
    pub fn is_truncation(&self, k: usize) -> bool {
        let d = self.dim();
        for a in 0..d - 1 {
            let i = self.axis_index(k, a);
            if i == 0 || i + 1 == self.axes[a].len() {
                return true;
            }
        }
        self.axis_index(k, d - 1) + 1 == self.axes[d - 1].len()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.axis_index(k, self.dim() - 1) == 0
    }

    /// Smallest spatial spacing.
    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest spatial spacing.
    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// All nodes with `t` in `times` as a point set.
    pub fn point_set(&self) -> PointSet {
        PointSet::lattice(&self.times, &self.axes)
    }

    fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
        let n = axis.len();
        let (lo, hi) = (axis[0], axis[n - 1]);
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if v < lo - tol || v > hi + tol {
            return None;
        }
        let v = v.clamp(lo, hi);
        let i = axis.partition_point(|a| *a <= v).clamp(1, n - 1) - 1;
        let w = (v - axis[i]) / (axis[i + 1] - axis[i]);
        Some((i, w))
    }
}

/// Three-point (or four-point) stencil weights from Fornberg's recursion.
///
/// Returns `weights[m][j]`, the weight of `nodes[j]` in the `m`-th
/// derivative at `x0`, for `m = 0..=order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencil offsets and weights for the first and second derivative at
/// index `i` of `axis`: centred inside, one-sided at the ends.
fn axis_stencils(axis: &[f64], i: usize) -> ([(isize, f64); 3], [(isize, f64); 4]) {
    let n = axis.len();
    let first_offsets: [isize; 3] = if i == 0 {
        [0, 1, 2]
    } else if i + 1 == n {
        [-2, -1, 0]
    } else {
        [-1, 0, 1]
    };
    let nodes: Vec<f64> = first_offsets.iter().map(|o| axis[(i as isize + o) as usize]).collect();
    let w = fornberg_weights(axis[i], &nodes, 1);
    let mut first = [(0isize, 0.0); 3];
    for k in 0..3 {
        first[k] = (first_offsets[k], w[1][k]);
    }
    let second_offsets: Vec<isize> = if n >= 4 && i == 0 {
        vec![0, 1, 2, 3]
    } else if n >= 4 && i + 1 == n {
        vec![-3, -2, -1, 0]
    } else {
        first_offsets.to_vec()
    };
    let nodes: Vec<f64> = second_offsets.iter().map(|o| axis[(i as isize + o) as usize]).collect();
    let w = fornberg_weights(axis[i], &nodes, 2);
    let mut second = [(0isize, 0.0); 4];
    for k in 0..second_offsets.len() {
        second[k] = (second_offsets[k], w[2][k]);
    }
    (first, second)
}

/// Values on every node of every time slice, row-major over `(t, x_1, .., x_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.n_slices() * grid.n_space();
        GridFunction {
            grid,
            values: vec![0.0; len],
        }
    }

    pub fn from_fn(grid: Grid, f: &dyn SpaceTimeFn) -> Self {
        let ns = grid.n_space();
        let values = (0..grid.n_slices() * ns)
            .into_par_iter()
            .map(|k| {
                let x = grid.node(k % ns);
                f.eval(grid.times[k / ns], &x)
            })
            .collect();
        GridFunction { grid, values }
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let ns = self.grid.n_space();
        &self.values[n * ns..(n + 1) * ns]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let ns = self.grid.n_space();
        &mut self.values[n * ns..(n + 1) * ns]
    }

    pub fn at(&self, n: usize, k: usize) -> f64 {
        self.values[n * self.grid.n_space() + k]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation in space, linear in time.
    pub fn interpolate(&self, t: f64, x: &[f64]) -> Result<f64> {
        let g = &self.grid;
        if x.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: x.len(),
            });
        }
        let mut p = vec![t];
        p.extend_from_slice(x);
        let (tn, tw) = Grid::locate(&g.times, t).ok_or_else(|| Error::Extrapolation(p.clone()))?;
        let mut cells = Vec::with_capacity(g.dim());
        for (a, v) in x.iter().enumerate() {
            cells.push(Grid::locate(&g.axes[a], *v).ok_or_else(|| Error::Extrapolation(p.clone()))?);
        }
        let spatial = |n: usize| -> f64 {
            let mut acc = 0.0;
            for corner in 0..(1usize << g.dim()) {
                let mut w = 1.0;
                let mut k = 0;
                for (a, &(i, wa)) in cells.iter().enumerate() {
                    let bit = (corner >> a) & 1;
                    w *= if bit == 1 { wa } else { 1.0 - wa };
                    k += (i + bit) * g.stride(a);
                }
                if w != 0.0 {
                    acc += w * self.at(n, k);
                }
            }
            acc
        };
        let v0 = spatial(tn);
        Ok(if tw == 0.0 {
            v0
        } else {
            (1.0 - tw) * v0 + tw * spatial(tn + 1)
        })
    }

    /// Finite-difference jet at node `k` of slice `n`.
    pub fn node_jet(&self, n: usize, k: usize) -> Jet {
        let g = &self.grid;
        let d = g.dim();
        let idx = g.multi_index(k);
        let (tf, _) = axis_stencils(&g.times, n);
        let dt = tf.iter().map(|&(o, w)| w * self.at((n as isize + o) as usize, k)).sum();
        let stencils: Vec<_> = (0..d).map(|a| axis_stencils(&g.axes[a], idx[a])).collect();
        let shift = |k: usize, a: usize, o: isize| -> usize { (k as isize + o * g.stride(a) as isize) as usize };
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for a in 0..d {
            let (first, second) = &stencils[a];
            grad[a] = first.iter().map(|&(o, w)| w * self.at(n, shift(k, a, o))).sum();
            hess[a * d + a] = second
                .iter()
                .filter(|(_, w)| *w != 0.0)
                .map(|&(o, w)| w * self.at(n, shift(k, a, o)))
                .sum();
            for b in (a + 1)..d {
                let mut m = 0.0;
                for &(oa, wa) in &stencils[a].0 {
                    for &(ob, wb) in &stencils[b].0 {
                        m += wa * wb * self.at(n, shift(shift(k, a, oa), b, ob));
                    }
                }
                hess[a * d + b] = m;
                hess[b * d + a] = m;
            }
        }
        Jet {
            value: self.at(n, k),
            dt,
            grad,
            hess,
        }
    }

    /// Finite-difference jets on all nodes, as grid functions per component.
    pub fn derivative_fields(&self) -> DerivativeFields {
        let g = &self.grid;
        let d = g.dim();
        let ns = g.n_space();
        let jets: Vec<Jet> = (0..self.values.len())
            .into_par_iter()
            .map(|m| self.node_jet(m / ns, m % ns))
            .collect();
        let field = |f: &dyn Fn(&Jet) -> f64| GridFunction {
            grid: g.clone(),
            values: jets.iter().map(f).collect(),
        };
        DerivativeFields {
            value: self.clone(),
            dt: field(&|j| j.dt),
            grad: (0..d).map(|i| field(&|j: &Jet| j.grad[i])).collect(),
            hess: (0..d * d).map(|ij| field(&|j: &Jet| j.hess[ij])).collect(),
        }
    }

    /// Interpolated finite-difference jets on an arbitrary point set.
    pub fn audit_jets(&self, points: &PointSet) -> Result<JetSamples> {
        self.derivative_fields().sample(points)
    }

    pub fn to_data(&self) -> GridData {
        GridData {
            n_slices: self.grid.n_slices(),
            dims: self.grid.dims(),
            values: self.values.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        write_grid(std::io::BufWriter::new(f), &self.to_data())
    }

    /// Loads values for `grid`; the file shape must match the grid.
    pub fn load(path: &Path, grid: Grid) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let data = read_grid(std::io::BufReader::new(f), Some(grid.dim()))?;
        if data.n_slices != grid.n_slices() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_slices(),
                got: data.n_slices,
            });
        }
        for (a, b) in grid.dims().iter().zip(&data.dims) {
            if a != b {
                return Err(Error::DimensionMismatch { expected: *a, got: *b });
            }
        }
        Ok(GridFunction {
            grid,
            values: data.values,
        })
    }
}

impl SpaceTimeFn for GridFunction {
    /// Interpolated value; points outside the grid read as NaN.
    fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.interpolate(t, x).unwrap_or(f64::NAN)
    }
}

/// Value and finite-difference derivatives of a grid function.
#[derive(Debug, Clone)]
pub struct DerivativeFields {
    pub value: GridFunction,
    pub dt: GridFunction,
    pub grad: Vec<GridFunction>,
    pub hess: Vec<GridFunction>,
}

impl DerivativeFields {
    pub fn sample(&self, points: &PointSet) -> Result<JetSamples> {
        let at = |f: &GridFunction| -> Result<Vec<f64>> {
            (0..points.len())
                .map(|k| f.interpolate(points.t(k), points.x(k)))
                .collect()
        };
        Ok(JetSamples {
            value: at(&self.value)?,
            dt: at(&self.dt)?,
            grad: self.grad.iter().map(at).collect::<Result<_>>()?,
            hess: self.hess.iter().map(at).collect::<Result<_>>()?,
        })
    }
}
