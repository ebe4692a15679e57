//! Pivoted Cholesky factorisation of continuous kernels on grids, with
//! a-priori error bounds checked at every step.
//!
//! The core object is [`CholeskyState`], the incremental factorisation of a
//! kernel restricted to a [`CandidateGrid`]. Pivot strategies live in
//! [`pivoting`], the a-priori bounds in [`bounds`], the matrix counterpart in
//! [`matrix`] and the Gaussian-process view (P-greedy) in [`gp`].

pub mod bounds;
pub mod cholesky;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod gp;
pub mod kernels;
pub mod matrix;
pub mod maxvol;
pub mod pivoting;
pub mod special;

pub use bounds::{BoundKind, BoundReport, ConvergenceRecord, Guarantee};
pub use cholesky::CholeskyState;
pub use error::{Error, Result};
pub use geometry::{tensor_grid, CandidateGrid, Domain, PivotSet};
pub use kernels::{Kernel, KernelSpec, MaternNu};
pub use pivoting::{run, PivotStrategy, RunConfig, RunOutput};
