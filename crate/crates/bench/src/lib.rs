//! Fixtures shared by the benchmarks.

use degenpara_core::grid::{Grid, GridSpec, Spacing};
use degenpara_core::holder::PointSet;
use degenpara_core::sparse::Csr;

/// Lattice of `n_t * n * n` points on `[0, 1] x [-1, 1] x [0, 2]`.
pub fn lattice(n_t: usize, n: usize) -> PointSet {
    let lin = |lo: f64, hi: f64, m: usize| {
        (0..m)
            .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
            .collect::<Vec<_>>()
    };
    PointSet::lattice(&lin(0.0, 1.0, n_t), &[lin(-1.0, 1.0, n), lin(0.0, 2.0, n)])
}

pub fn grid(n: usize, n_t: usize) -> Grid {
    Grid::new(GridSpec {
        d: 2,
        t_max: 0.5,
        n_t,
        x_half_width: 2.0,
        n_lateral: n,
        y_max: 2.0,
        n_normal: n,
        spacing: Spacing::Graded,
    })
    .expect("valid grid")
}

/// `I + dt * (5-point Laplacian plus upwind drift)` on an `n x n` grid;
/// a nonsymmetric M-matrix of the kind each implicit step solves.
pub fn implicit_system(n: usize, dt: f64) -> Csr {
    let h = 1.0 / (n + 1) as f64;
    let diff = dt / (h * h);
    let drift = dt / h;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mut row = vec![(k, 1.0 + 4.0 * diff + drift)];
            if i > 0 {
                row.push((k - n, -diff));
            }
            if i + 1 < n {
                row.push((k + n, -diff - drift));
            }
            if j > 0 {
                row.push((k - 1, -diff));
            }
            if j + 1 < n {
                row.push((k + 1, -diff));
            }
            rows.push(row);
        }
    }
    Csr::from_rows(rows)
}
