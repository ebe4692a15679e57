//! Log-log least-squares rate fits.

use crate::bounds::ConvergenceRecord;
use crate::cholesky::BREAKDOWN_TOLERANCE;
use crate::error::{Error, Result};

/// Minimum number of points for a fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    /// Natural-log intercept: `log r ≈ intercept + slope·log n`.
    pub intercept: f64,
    pub r_squared: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    pub points: usize,
}

/// Ordinary least squares of `log r` against `log n` over `n ∈ [n_lo, n_hi]`,
/// dropping values at or below `floor`.
pub fn fit_power_law(data: &[(usize, f64)], n_lo: usize, n_hi: usize, floor: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|&&(n, r)| n >= n_lo && n <= n_hi && n > 0 && r > floor && r > 0.0)
        .map(|&(n, r)| ((n as f64).ln(), r.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::arg(format!("only {} usable points in [{n_lo}, {n_hi}], need {MIN_FIT_POINTS}", pts.len())));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("all fit points share one n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(RateFit { slope, intercept, r_squared, n_lo, n_hi, points: pts.len() })
}

/// Fits `sup_residual` against `n`, excluding values within ten breakdown
/// tolerances of zero (relative to the first recorded residual).
pub fn fit_rate(records: &[ConvergenceRecord], n_lo: usize, n_hi: usize) -> Result<RateFit> {
    let scale = records.iter().map(|r| r.sup_residual).fold(0.0, f64::max);
    let data: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.sup_residual)).collect();
    fit_power_law(&data, n_lo, n_hi, 10.0 * BREAKDOWN_TOLERANCE * scale)
}
