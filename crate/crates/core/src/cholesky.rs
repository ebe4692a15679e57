//! Incremental pivoted Cholesky on a candidate grid.
//!
//! The state keeps the normalised columns `c_i(x) = R_{i−1}(x, z_i)/√d_i`
//! over every grid point, so the residual is never materialised:
//! `R_n(x, y) = K(x, y) − Σ_i c_i(x) c_i(y)`. Each step costs one kernel
//! column plus `n` axpy sweeps over the grid.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::CandidateGrid;
use crate::kernels::Kernel;

/// A pivot is accepted only if its residual exceeds this times `K_max`.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-12;

/// Diagonal values within this times `K_max` of the maximum count as tied;
/// the lowest index among them wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Negative diagonal values down to `−NEGATIVE_SLACK · K_max` are clamped to 0.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// First index whose value is within `tie` of the maximum.
pub(crate) fn argmax_with_ties(values: &[f64], tie: f64) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    values.iter().position(|&v| v >= max - tie)
}

/// [`argmax_with_ties`], except that a tie pick at or below `floor` gives way
/// to the exact maximiser, so a maximum just above the breakdown floor is
/// never passed over for a tied value below it.
pub(crate) fn pivot_argmax(values: &[f64], tie: f64, floor: f64) -> Option<usize> {
    let i = argmax_with_ties(values, tie)?;
    if values[i] > floor {
        return Some(i);
    }
    let max = values[i].max(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    values.iter().position(|&v| v == max)
}

#[derive(Debug, Clone)]
pub struct CholeskyState {
    kernel: Kernel,
    grid: Arc<CandidateGrid>,
    pivots: Vec<usize>,
    pivot_values: Vec<f64>,
    columns: Vec<Vec<f64>>,
    diag: Vec<f64>,
    // row i holds c_0(z_i), …, c_i(z_i); the diagonal entry is √d_i
    cross: Vec<Vec<f64>>,
    selected: Vec<bool>,
    k_max: f64,
    prior_diag: Vec<f64>,
}

impl CholeskyState {
    /// `R_0 = K`: zero pivots, diagonal cache `K(x, x)`.
    pub fn init(kernel: Kernel, grid: Arc<CandidateGrid>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::arg("empty candidate grid"));
        }
        if kernel.dim() != grid.dim() {
            return Err(Error::arg(format!(
                "kernel dimension {} differs from grid dimension {}",
                kernel.dim(),
                grid.dim()
            )));
        }
        let mut diag = Vec::with_capacity(grid.len());
        for x in grid.points() {
            let v = kernel.eval(x, x);
            if !v.is_finite() {
                return Err(Error::Numeric(format!("K(x, x) = {v} at grid point {x:?}")));
            }
            if v < 0.0 {
                return Err(Error::Numeric(format!("negative K(x, x) = {v} at grid point {x:?}")));
            }
            diag.push(v);
        }
        let k_max = diag.iter().copied().fold(0.0, f64::max);
        let n = grid.len();
        let prior_diag = diag.clone();
        Ok(CholeskyState {
            kernel,
            grid,
            pivots: Vec::new(),
            pivot_values: Vec::new(),
            columns: Vec::new(),
            diag,
            cross: Vec::new(),
            selected: vec![false; n],
            k_max,
            prior_diag,
        })
    }

    /// Factorises with the given pivots, in order.
    pub fn from_pivots(kernel: Kernel, grid: Arc<CandidateGrid>, pivots: &[usize]) -> Result<Self> {
        let mut state = CholeskyState::init(kernel, grid)?;
        for &p in pivots {
            state.step(p)?;
        }
        Ok(state)
    }

    /// One Cholesky step at grid index `pivot`:
    /// `K_n = K_{n−1} + R_{n−1}(·, z) R_{n−1}(z, ·) / R_{n−1}(z, z)`.
    pub fn step(&mut self, pivot: usize) -> Result<()> {
        self.check_pivot(pivot)?;
        let z = self.grid.point(pivot);
        let col: Vec<f64> = self.grid.points().map(|x| self.kernel.eval(x, z)).collect();
        self.step_with_column(pivot, col)
    }

    fn check_pivot(&self, pivot: usize) -> Result<()> {
        let g = self.grid.len();
        if pivot >= g {
            return Err(Error::arg(format!("pivot index {pivot} outside grid of {g} points")));
        }
        if self.selected[pivot] {
            return Err(Error::arg(format!("grid index {pivot} is already a pivot")));
        }
        let d = self.diag[pivot];
        let tolerance = self.breakdown_threshold();
        if d <= tolerance {
            return Err(Error::Breakdown { step: self.rank() + 1, value: d, tolerance });
        }
        Ok(())
    }

    /// [`step`](Self::step) with the kernel column `K(·, z)` over the grid
    /// already evaluated.
    pub(crate) fn step_with_column(&mut self, pivot: usize, mut col: Vec<f64>) -> Result<()> {
        self.check_pivot(pivot)?;
        let grid = Arc::clone(&self.grid);
        let d = self.diag[pivot];
        debug_assert_eq!(col.len(), grid.len());
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("K(x, z) non-finite at grid point {:?}", grid.point(i))));
        }
        for cj in &self.columns {
            let cjz = cj[pivot];
            for (c, &v) in col.iter_mut().zip(cj) {
                *c -= cjz * v;
            }
        }
        let root = d.sqrt();
        let inv = 1.0 / root;
        for c in col.iter_mut() {
            *c *= inv;
        }
        col[pivot] = root;

        let floor = -NEGATIVE_SLACK * self.k_max;
        for (i, (r, &c)) in self.diag.iter_mut().zip(&col).enumerate() {
            *r -= c * c;
            if *r < 0.0 {
                if *r < floor {
                    return Err(Error::Numeric(format!(
                        "diagonal residual {r:e} at grid point {:?} lost positive semidefiniteness",
                        grid.point(i)
                    )));
                }
                *r = 0.0;
            }
        }
        self.diag[pivot] = 0.0;

        let mut row: Vec<f64> = self.columns.iter().map(|cj| cj[pivot]).collect();
        row.push(root);
        self.cross.push(row);
        self.columns.push(col);
        self.pivots.push(pivot);
        self.pivot_values.push(d);
        self.selected[pivot] = true;
        Ok(())
    }

    /// Drops every pivot after the first `len`. The diagonal is rebuilt with
    /// the same operations as the forward steps, so the result is bitwise
    /// what `from_pivots(&pivots[..len])` would give.
    pub(crate) fn truncate(&mut self, len: usize) {
        if len >= self.rank() {
            return;
        }
        for &p in &self.pivots[len..] {
            self.selected[p] = false;
        }
        self.pivots.truncate(len);
        self.pivot_values.truncate(len);
        self.columns.truncate(len);
        self.cross.truncate(len);
        self.diag.copy_from_slice(&self.prior_diag);
        for (col, &p) in self.columns.iter().zip(&self.pivots) {
            for (r, &c) in self.diag.iter_mut().zip(col) {
                *r -= c * c;
                if *r < 0.0 {
                    *r = 0.0;
                }
            }
            self.diag[p] = 0.0;
        }
    }

    /// `c_i(x)` for an arbitrary point, by forward substitution through the
    /// pivot cross matrix.
    pub fn off_grid_column(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.grid.dim() {
            return Err(Error::arg("query point has the wrong dimension"));
        }
        let n = self.rank();
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let kxz = self.kernel.eval(x, self.grid.point(self.pivots[i]));
            if !kxz.is_finite() {
                return Err(Error::Numeric(format!("K(x, z_{i}) non-finite at {x:?}")));
            }
            let row = &self.cross[i];
            let s: f64 = (0..i).map(|j| c[j] * row[j]).sum();
            c.push((kxz - s) / row[i]);
        }
        Ok(c)
    }

    /// `R_n(x, y)` anywhere in the domain.
    pub fn residual_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let k = self.kernel.try_eval(x, y)?;
        if !k.is_finite() {
            return Err(Error::Numeric(format!("K(x, y) non-finite at {x:?}, {y:?}")));
        }
        let cx = self.off_grid_column(x)?;
        let cy = if x == y { cx.clone() } else { self.off_grid_column(y)? };
        Ok(k - cx.iter().zip(&cy).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Grid index of the largest diagonal residual (lowest index among ties)
    /// and the diagonal value there.
    pub fn max_diag(&self) -> (usize, f64) {
        let i = pivot_argmax(&self.diag, TIE_TOLERANCE * self.k_max, self.breakdown_threshold()).unwrap_or(0);
        (i, self.diag[i])
    }

    /// `‖R_n‖_∞` over the grid; equals the diagonal maximum for a PSD residual.
    pub fn residual_sup_norm(&self) -> f64 {
        self.diag.iter().copied().fold(0.0, f64::max)
    }

    pub fn breakdown_threshold(&self) -> f64 {
        BREAKDOWN_TOLERANCE * self.k_max
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &Arc<CandidateGrid> {
        &self.grid
    }

    /// Pivot grid indices in selection order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `d_i = R_{i−1}(z_i, z_i)` at selection time.
    pub fn pivot_values(&self) -> &[f64] {
        &self.pivot_values
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Lower-triangular rows `c_j(z_i)`, `j ≤ i`.
    pub fn cross_matrix(&self) -> &[Vec<f64>] {
        &self.cross
    }

    /// `R_n(x, x)` at every grid point (negative roundoff already clamped).
    pub fn diag_residual(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.selected[i]
    }

    /// Largest initial diagonal value, the scale for every relative tolerance.
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Writes `step, z_0.., pivot_value` rows.
    pub fn write_pivot_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.grid.dim();
        let mut header = String::from("step");
        for a in 0..dim {
            header.push_str(&format!(",pivot_x{a}"));
        }
        header.push_str(",pivot_value");
        writeln!(out, "{header}")?;
        for (k, (&p, &d)) in self.pivots.iter().zip(&self.pivot_values).enumerate() {
            let mut line = format!("{}", k + 1);
            for v in self.grid.point(p) {
                line.push_str(&format!(",{v:.16e}"));
            }
            line.push_str(&format!(",{d:.16e}"));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Factorises `pivots` in the given order and in the order `permutation`
/// (a permutation of positions) and returns the largest diagonal difference.
pub fn check_order_invariance(
    kernel: &Kernel,
    grid: &Arc<CandidateGrid>,
    pivots: &[usize],
    permutation: &[usize],
) -> Result<f64> {
    let mut sorted = permutation.to_vec();
    sorted.sort_unstable();
    if sorted != (0..pivots.len()).collect::<Vec<_>>() {
        return Err(Error::arg("permutation does not match the pivot count"));
    }
    let permuted: Vec<usize> = permutation.iter().map(|&p| pivots[p]).collect();
    let a = CholeskyState::from_pivots(kernel.clone(), Arc::clone(grid), pivots)?;
    let b = CholeskyState::from_pivots(kernel.clone(), Arc::clone(grid), &permuted)?;
    Ok(a.diag_residual().iter().zip(b.diag_residual()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
