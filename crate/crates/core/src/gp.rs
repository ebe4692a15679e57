//! Noise-free Gaussian-process posteriors and the power function, computed
//! by dense Gram solves independent of the incremental factorisation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::cholesky::{pivot_argmax, BREAKDOWN_TOLERANCE, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{CandidateGrid, PivotSet};
use crate::kernels::Kernel;

pub type MeanFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Factorised Gram matrix `K(S, S) + τ²I` on a site set.
#[derive(Clone)]
struct Gram {
    kernel: Kernel,
    sites: PivotSet,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Gram {
    fn new(kernel: &Kernel, sites: &PivotSet, jitter: f64) -> Result<Self> {
        if !sites.is_empty() && sites.dim() != kernel.dim() {
            return Err(Error::arg("site and kernel dimensions differ"));
        }
        let n = sites.len();
        let chol = if n == 0 {
            None
        } else {
            let k = DMatrix::from_fn(n, n, |i, j| {
                kernel.eval(sites.get(i), sites.get(j)) + if i == j { jitter * jitter } else { 0.0 }
            });
            Some(Cholesky::new(k).ok_or_else(|| Error::Numeric("Gram matrix at the sites is singular".into()))?)
        };
        Ok(Gram { kernel: kernel.clone(), sites: sites.clone(), chol })
    }

    fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.sites.len(), self.sites.iter().map(|s| self.kernel.eval(x, s)))
    }

    /// `K(x, y) − k(x)ᵀ K(S, S)⁻¹ k(y)`.
    fn schur(&self, x: &[f64], y: &[f64]) -> f64 {
        let base = self.kernel.eval(x, y);
        match &self.chol {
            None => base,
            Some(c) => {
                let kx = self.cross(x);
                let ky = self.cross(y);
                base - kx.dot(&c.solve(&ky))
            }
        }
    }
}

/// Posterior of a zero-noise GP conditioned on `y_i` at sites `x_i`.
#[derive(Clone)]
pub struct GpPosterior {
    gram: Gram,
    prior_mean: Option<Arc<MeanFn>>,
    weights: DVector<f64>,
}

impl fmt::Debug for GpPosterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GpPosterior")
            .field("kernel", &self.gram.kernel.name())
            .field("sites", &self.gram.sites.len())
            .field("prior_mean", &self.prior_mean.is_some())
            .finish()
    }
}

impl GpPosterior {
    /// Zero prior mean, no jitter.
    pub fn fit(kernel: &Kernel, sites: &PivotSet, values: &[f64]) -> Result<Self> {
        Self::fit_with(kernel, sites, values, None, 0.0)
    }

    /// `jitter = τ` adds `τ²I` to the Gram matrix.
    pub fn fit_with(
        kernel: &Kernel,
        sites: &PivotSet,
        values: &[f64],
        prior_mean: Option<Arc<MeanFn>>,
        jitter: f64,
    ) -> Result<Self> {
        if values.len() != sites.len() {
            return Err(Error::arg(format!("{} values for {} sites", values.len(), sites.len())));
        }
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(Error::arg("jitter must be finite and nonnegative"));
        }
        let gram = Gram::new(kernel, sites, jitter)?;
        let centred = DVector::from_iterator(
            values.len(),
            sites.iter().zip(values).map(|(s, y)| y - prior_mean.as_ref().map_or(0.0, |m| m(s))),
        );
        let weights = match &gram.chol {
            Some(c) => c.solve(&centred),
            None => centred,
        };
        Ok(GpPosterior { gram, prior_mean, weights })
    }

    pub fn sites(&self) -> &PivotSet {
        &self.gram.sites
    }

    pub fn kernel(&self) -> &Kernel {
        &self.gram.kernel
    }

    /// `μ(x) + k(x)ᵀ K(S, S)⁻¹ (y − μ(S))`.
    pub fn posterior_mean(&self, x: &[f64]) -> f64 {
        let prior = self.prior_mean.as_ref().map_or(0.0, |m| m(x));
        prior + self.gram.cross(x).dot(&self.weights)
    }

    /// `K(x, y) − k(x)ᵀ K(S, S)⁻¹ k(y)`.
    pub fn posterior_cov(&self, x: &[f64], y: &[f64]) -> f64 {
        self.gram.schur(x, y)
    }

    pub fn posterior_variance(&self, x: &[f64]) -> f64 {
        self.gram.schur(x, x)
    }

    /// Standard deviation, with roundoff-negative variances read as zero.
    pub fn posterior_sd(&self, x: &[f64]) -> f64 {
        self.posterior_variance(x).max(0.0).sqrt()
    }
}

/// Power function of a fixed site set, evaluated by the Schur formula.
#[derive(Clone)]
pub struct PowerFunction {
    gram: Gram,
}

impl PowerFunction {
    pub fn new(kernel: &Kernel, sites: &PivotSet) -> Result<Self> {
        Ok(PowerFunction { gram: Gram::new(kernel, sites, 0.0)? })
    }

    /// `√max(0, K(x, x) − k(x)ᵀ K(S, S)⁻¹ k(x))`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.gram.schur(x, x).max(0.0).sqrt()
    }
}

pub fn power_function(kernel: &Kernel, sites: &PivotSet, x: &[f64]) -> Result<f64> {
    Ok(PowerFunction::new(kernel, sites)?.eval(x))
}

/// Sites chosen by P-greedy, as grid indices and points.
#[derive(Debug, Clone)]
pub struct PGreedySelection {
    pub indices: Vec<usize>,
    pub sites: PivotSet,
}

/// Repeatedly adds the grid point maximising the power function, using the
/// same lowest-index tie rule as complete pivoting.
pub fn pgreedy_select(kernel: &Kernel, grid: &CandidateGrid, n: usize) -> Result<PGreedySelection> {
    if n > grid.len() {
        return Err(Error::arg(format!("cannot select {n} sites from {} grid points", grid.len())));
    }
    let k_max = grid.points().map(|x| kernel.eval(x, x)).fold(0.0, f64::max);
    let mut indices = Vec::with_capacity(n);
    let mut sites = PivotSet::new(grid.dim());
    for step in 1..=n {
        let power = PowerFunction::new(kernel, &sites)?;
        let p2: Vec<f64> = grid.points().map(|x| power.gram.schur(x, x).max(0.0)).collect();
        let tolerance = BREAKDOWN_TOLERANCE * k_max;
        let i = pivot_argmax(&p2, TIE_TOLERANCE * k_max, tolerance).expect("nonempty grid");
        if p2[i] <= tolerance {
            return Err(Error::Breakdown { step, value: p2[i], tolerance });
        }
        indices.push(i);
        sites.push(grid.point(i))?;
    }
    Ok(PGreedySelection { indices, sites })
}
