//! Local maximum-volume pivot sets over a candidate grid.
//!
//! For a pivot set `S` with pivot `z_k` removed, the block-determinant
//! identity gives `det K[S∖z_k ∪ y] = det K[S∖z_k] · R̃(y, y)`, where `R̃` is
//! the residual of the factorisation on `S∖z_k`. A swap `z_k → y` therefore
//! increases the volume exactly when `R̃(y, y) > R̃(z_k, z_k)`.
//!
//! `R̃` is obtained from the full factorisation by a rank-one downdate:
//! with `v = L⁻¹e_k` (column `k` of the inverse cross matrix),
//! `R̃(y, y) = R_n(y, y) + (vᵀc(y))² / ‖v‖²`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::cholesky::{argmax_with_ties, CholeskyState, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::CandidateGrid;
use crate::kernels::Kernel;

/// A swap must raise the leave-one-out diagonal by this relative margin.
pub const SWAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MaxVolOutcome {
    pub state: CholeskyState,
    /// False when `max_sweeps` ran out with swaps still happening.
    pub converged: bool,
    pub sweeps: usize,
    pub swaps: usize,
}

/// Diagonal of the residual after factorising every pivot except position `k`,
/// over the whole grid.
pub fn leave_one_out_diag(state: &CholeskyState, k: usize) -> Result<Vec<f64>> {
    let n = state.rank();
    if k >= n {
        return Err(Error::arg(format!("pivot position {k} out of range for rank {n}")));
    }
    let l = state.cross_matrix();
    let mut v = vec![0.0; n];
    v[k] = 1.0 / l[k][k];
    for i in k + 1..n {
        let s: f64 = (k..i).map(|j| l[i][j] * v[j]).sum();
        v[i] = -s / l[i][i];
    }
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    let mut w = vec![0.0; state.grid().len()];
    for (vi, ci) in v.iter().zip(state.columns()).skip(k) {
        for (wy, &c) in w.iter_mut().zip(ci) {
            *wy += vi * c;
        }
    }
    Ok(state.diag_residual().iter().zip(&w).map(|(d, wy)| d + wy * wy / norm2).collect())
}

/// Complete pivoting for `n` steps, then swap sweeps until no single swap
/// increases the volume (or `max_sweeps` is reached).
pub fn select_local_maxvol(
    kernel: Kernel,
    grid: Arc<CandidateGrid>,
    n: usize,
    max_sweeps: usize,
) -> Result<MaxVolOutcome> {
    if n == 0 || n > grid.len() {
        return Err(Error::arg(format!("cannot pick {n} pivots from {} grid points", grid.len())));
    }
    let mut state = CholeskyState::init(kernel, grid)?;
    for _ in 0..n {
        let (i, v) = state.max_diag();
        if v <= state.breakdown_threshold() {
            return Err(Error::Breakdown { step: state.rank() + 1, value: v, tolerance: state.breakdown_threshold() });
        }
        state.step(i)?;
    }
    improve_local_maxvol(state, max_sweeps)
}

/// Leave-one-out numerators `vₖᵀc(y)` for every pivot position at once, with
/// the squared norms `‖vₖ‖²`.
fn all_leave_one_out(state: &CholeskyState) -> (DMatrix<f64>, Vec<f64>) {
    let n = state.rank();
    let g = state.grid().len();
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { state.cross_matrix()[i][j] } else { 0.0 });
    let linv = l.solve_lower_triangular(&DMatrix::identity(n, n)).expect("cross matrix has a positive diagonal");
    let mut c = DMatrix::zeros(n, g);
    for (i, col) in state.columns().iter().enumerate() {
        for (y, &v) in col.iter().enumerate() {
            c[(i, y)] = v;
        }
    }
    let norms = (0..n).map(|k| linv.column(k).norm_squared()).collect();
    (linv.transpose() * c, norms)
}

fn kernel_column(state: &CholeskyState, p: usize) -> Vec<f64> {
    let z = state.grid().point(p);
    state.grid().points().map(|x| state.kernel().eval(x, z)).collect()
}

/// Runs swap sweeps on an existing factorisation.
pub fn improve_local_maxvol(mut state: CholeskyState, max_sweeps: usize) -> Result<MaxVolOutcome> {
    let mut swaps = 0;
    let mut sweeps = 0;
    let mut converged = false;
    let tie = TIE_TOLERANCE * state.k_max();
    let mut columns: HashMap<usize, Vec<f64>> = HashMap::new();
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut swapped = false;
        let (mut w, mut norms) = all_leave_one_out(&state);
        for k in 0..state.rank() {
            let loo: Vec<f64> = state
                .diag_residual()
                .iter()
                .enumerate()
                .map(|(y, d)| if state.is_pivot(y) { f64::NEG_INFINITY } else { d + w[(k, y)].powi(2) / norms[k] })
                .collect();
            let current = 1.0 / norms[k];
            let Some(y) = argmax_with_ties(&loo, tie) else {
                continue;
            };
            if loo[y] > current * (1.0 + SWAP_TOLERANCE) {
                let mut pivots = state.pivots().to_vec();
                pivots[k] = y;
                // columns before position k do not depend on pivot k
                state.truncate(k);
                for &p in &pivots[k..] {
                    let col = columns.entry(p).or_insert_with(|| kernel_column(&state, p)).clone();
                    state.step_with_column(p, col)?;
                }
                swaps += 1;
                swapped = true;
                (w, norms) = all_leave_one_out(&state);
            }
        }
        if !swapped {
            converged = true;
            break;
        }
    }
    Ok(MaxVolOutcome { state, converged, sweeps, swaps })
}
