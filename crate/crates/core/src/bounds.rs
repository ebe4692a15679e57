//! Convergence records and the per-step bound checks run against them.
//!
//! Every check compares a grid quantity with a theoretical bound plus
//! [`BOUND_SLACK`]. Grid values are exact sup norms of the kernel restricted
//! to the grid, so each bound below holds on the grid as stated; the `+η`
//! terms account for the continuous fill distance.

use std::collections::BTreeMap;
use std::fmt;

use crate::cholesky::CholeskyState;
use crate::geometry::{Domain, NearestPivotTracker};

/// Absolute slack on every bound comparison.
pub const BOUND_SLACK: f64 = 1e-10;

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    /// Coordinates of the pivot added at this step.
    pub pivot: Vec<f64>,
    pub pivot_value: f64,
    pub sup_residual: f64,
    /// Grid fill distance (max over grid of distance to nearest pivot).
    pub fill: f64,
    /// Grid covering radius η.
    pub eta: f64,
    pub min_sep: Option<f64>,
    /// `4L(h + η)`.
    pub bound_fill: Option<f64>,
    /// `8LR/(δ(n^{1/d} − 1))`, `8LR` at `n = 1`.
    pub bound_pack: Option<f64>,
    /// `√d(2L + L0²/K_min)(h + η)²`.
    pub bound_c11: Option<f64>,
    pub grid_size: usize,
    pub wall_time_ms: f64,
}

/// Which bound a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    /// `‖R_n‖ ≤ 4L(h + η)`, any strategy.
    FillDistance,
    /// `R_n(x,x) ≤ 4L min_i ‖x − z_i‖` at every grid point, any strategy.
    PointwiseLinear,
    /// `‖R_n‖ ≤ (4L/δ) min_{i<j} ‖z_i − z_j‖`, greedy or max-volume pivots.
    Separation,
    /// `‖R_n‖ ≤ 8LR/(δ(n^{1/d} − 1))`.
    Packing,
    /// `min_sep ≤ 2R/(n^{1/d} − 1)`, complete pivoting.
    SeparationPacking,
    /// `h ≤ 2R/(n^{1/d} − 1) + η`, complete pivoting on strictly PD kernels
    /// whose diagonal does not vanish.
    FillDecay,
    /// `R_n(x,x) ≤ √d(2L + L0²/K_min) min_i ‖x − z_i‖²`, C^{1,1} kernels.
    PointwiseQuadratic,
    /// `‖R_n‖ ≤ √d(2L + L0²/K_min)(h + η)²`, C^{1,1} kernels.
    QuadraticFill,
    /// `‖R_n‖ ≤ 2L‖w‖/m + 4Lη` once all `m^d` tensor pivots are in.
    TensorUniform,
    /// `‖R_n‖ ≤ ‖R_{n−1}‖`, nested strategies.
    Monotone,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::FillDistance => "fill_distance",
            BoundKind::PointwiseLinear => "pointwise_linear",
            BoundKind::Separation => "separation",
            BoundKind::Packing => "packing",
            BoundKind::SeparationPacking => "separation_packing",
            BoundKind::FillDecay => "fill_decay",
            BoundKind::PointwiseQuadratic => "pointwise_quadratic",
            BoundKind::QuadraticFill => "quadratic_fill",
            BoundKind::TensorUniform => "tensor_uniform",
            BoundKind::Monotone => "monotone",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStat {
    pub checks: usize,
    pub violations: usize,
    /// Largest `value / bound` seen.
    pub worst_ratio: f64,
    pub worst_step: usize,
}

/// Worst case and violation count per bound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    stats: BTreeMap<BoundKind, BoundStat>,
}

impl BoundReport {
    /// Records `value ≤ bound + BOUND_SLACK`.
    pub fn check(&mut self, kind: BoundKind, step: usize, value: f64, bound: f64) -> bool {
        let ok = value <= bound + BOUND_SLACK;
        let ratio = if bound > 0.0 {
            value / bound
        } else if value > BOUND_SLACK {
            f64::INFINITY
        } else {
            0.0
        };
        let stat = self.stats.entry(kind).or_insert(BoundStat {
            checks: 0,
            violations: 0,
            worst_ratio: f64::NEG_INFINITY,
            worst_step: step,
        });
        stat.checks += 1;
        if !ok {
            stat.violations += 1;
        }
        if ratio > stat.worst_ratio {
            stat.worst_ratio = ratio;
            stat.worst_step = step;
        }
        ok
    }

    pub fn get(&self, kind: BoundKind) -> Option<&BoundStat> {
        self.stats.get(&kind)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BoundKind, &BoundStat)> {
        self.stats.iter().map(|(k, v)| (*k, v))
    }

    pub fn total_violations(&self) -> usize {
        self.stats.values().map(|s| s.violations).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn merge(&mut self, other: &BoundReport) {
        for (kind, s) in &other.stats {
            let e = self.stats.entry(*kind).or_insert(BoundStat {
                checks: 0,
                violations: 0,
                worst_ratio: f64::NEG_INFINITY,
                worst_step: s.worst_step,
            });
            e.checks += s.checks;
            e.violations += s.violations;
            if s.worst_ratio > e.worst_ratio {
                e.worst_ratio = s.worst_ratio;
                e.worst_step = s.worst_step;
            }
        }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (kind, s) in &self.stats {
            writeln!(
                f,
                "{:<20} checks={:<6} violations={:<4} worst_ratio={:.6} (step {})",
                kind.label(),
                s.checks,
                s.violations,
                s.worst_ratio,
                s.worst_step
            )?;
        }
        Ok(())
    }
}

/// What a strategy guarantees, for deciding which bounds apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    /// Every pivot within factor δ of the grid maximum (δ = 1: complete).
    Greedy { delta: f64 },
    /// Locally maximal determinant over the grid.
    MaxVolume,
    /// No guarantee beyond the pivots being in the domain.
    Arbitrary,
}

/// Bound formulas for one run.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub diag_lipschitz: Option<f64>,
    pub c11_coefficient: Option<f64>,
    pub radius: f64,
    pub dim: usize,
    pub guarantee: Guarantee,
    pub nested: bool,
    /// Strictly PD kernel with a diagonal bounded away from zero on the grid;
    /// only then is the fill-decay check applied.
    pub fill_decay: bool,
    /// `(n, bound)` for the full tensor pivot set of uniform pivoting.
    pub tensor_target: Option<(usize, f64)>,
}

impl BoundContext {
    pub fn new(state: &CholeskyState, domain: &Domain, guarantee: Guarantee, nested: bool) -> Self {
        let kernel = state.kernel();
        BoundContext {
            diag_lipschitz: kernel.diag_lipschitz(),
            c11_coefficient: kernel.c11_constants().map(|c| c.quadratic_coefficient(domain.dim())),
            radius: domain.radius(),
            dim: domain.dim(),
            guarantee,
            nested,
            fill_decay: kernel.is_strictly_pd() && state.diag_residual().iter().all(|&d| d > 0.0),
            tensor_target: None,
        }
    }

    fn delta(&self) -> Option<f64> {
        match self.guarantee {
            Guarantee::Greedy { delta } => Some(delta),
            Guarantee::MaxVolume => Some(1.0),
            Guarantee::Arbitrary => None,
        }
    }

    pub fn fill_bound(&self, fill: f64, eta: f64) -> Option<f64> {
        self.diag_lipschitz.map(|l| 4.0 * l * (fill + eta))
    }

    pub fn packing_bound(&self, n: usize) -> Option<f64> {
        let l = self.diag_lipschitz?;
        if n == 1 {
            return Some(8.0 * l * self.radius);
        }
        let delta = self.delta()?;
        Some(8.0 * l * self.radius / (delta * ((n as f64).powf(1.0 / self.dim as f64) - 1.0)))
    }

    pub fn quadratic_bound(&self, fill: f64, eta: f64) -> Option<f64> {
        self.c11_coefficient.map(|c| c * (fill + eta) * (fill + eta))
    }

    fn separation_radius(&self, n: usize) -> f64 {
        2.0 * self.radius / ((n as f64).powf(1.0 / self.dim as f64) - 1.0)
    }
}

/// Builds the record for the current state and runs every applicable check.
pub fn observe(
    ctx: &BoundContext,
    state: &CholeskyState,
    tracker: &NearestPivotTracker,
    previous_sup: Option<f64>,
    wall_time_ms: f64,
    report: &mut BoundReport,
) -> ConvergenceRecord {
    let n = state.rank();
    let grid = state.grid();
    let eta = grid.spacing();
    let sup = state.residual_sup_norm();
    let fill = tracker.fill().unwrap_or(f64::INFINITY);
    let min_sep = tracker.min_separation();
    let last = *state.pivots().last().expect("observe after at least one step");

    let record = ConvergenceRecord {
        n,
        pivot: grid.point(last).to_vec(),
        pivot_value: *state.pivot_values().last().unwrap(),
        sup_residual: sup,
        fill,
        eta,
        min_sep,
        bound_fill: ctx.fill_bound(fill, eta),
        bound_pack: ctx.packing_bound(n),
        bound_c11: ctx.quadratic_bound(fill, eta),
        grid_size: grid.len(),
        wall_time_ms,
    };

    if let Some(b) = record.bound_fill {
        report.check(BoundKind::FillDistance, n, sup, b);
    }
    if let Some(l) = ctx.diag_lipschitz {
        let worst = pointwise_worst(state, tracker, |d| 4.0 * l * d);
        report.check(BoundKind::PointwiseLinear, n, worst.0, worst.1);
    }
    if let Some(c) = ctx.c11_coefficient {
        let worst = pointwise_worst(state, tracker, |d| c * d * d);
        report.check(BoundKind::PointwiseQuadratic, n, worst.0, worst.1);
    }
    if let Some(b) = record.bound_c11 {
        report.check(BoundKind::QuadraticFill, n, sup, b);
    }
    if let Some(b) = record.bound_pack {
        report.check(BoundKind::Packing, n, sup, b);
    }
    if let (Some(l), Some(delta), Some(sep)) = (ctx.diag_lipschitz, ctx.delta(), min_sep) {
        report.check(BoundKind::Separation, n, sup, 4.0 * l / delta * sep);
    }
    if n > 1 && ctx.guarantee == (Guarantee::Greedy { delta: 1.0 }) && ctx.diag_lipschitz.is_some() {
        if let Some(sep) = min_sep {
            report.check(BoundKind::SeparationPacking, n, sep, ctx.separation_radius(n));
        }
        if ctx.fill_decay {
            report.check(BoundKind::FillDecay, n, fill, ctx.separation_radius(n) + eta);
        }
    }
    if let Some((target, b)) = ctx.tensor_target {
        if n == target {
            report.check(BoundKind::TensorUniform, n, sup, b);
        }
    }
    if ctx.nested {
        if let Some(prev) = previous_sup {
            report.check(BoundKind::Monotone, n, sup, prev + 1e-12 * state.k_max());
        }
    }
    record
}

/// The grid point with the largest excess `diag(x) − bound(dist(x))` if any
/// point violates its bound, otherwise the point with the largest ratio, as
/// `(value, bound)`.
fn pointwise_worst(state: &CholeskyState, tracker: &NearestPivotTracker, bound: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut by_excess = ((0.0, 0.0), f64::NEG_INFINITY);
    let mut by_ratio = ((0.0, 0.0), f64::NEG_INFINITY);
    for (i, &r) in state.diag_residual().iter().enumerate() {
        let b = bound(tracker.distance(i));
        if r - b > by_excess.1 {
            by_excess = ((r, b), r - b);
        }
        if b > 0.0 && r / b > by_ratio.1 {
            by_ratio = ((r, b), r / b);
        }
    }
    if by_excess.1 > BOUND_SLACK || by_ratio.1 == f64::NEG_INFINITY {
        by_excess.0
    } else {
        by_ratio.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_tracks_worst_and_violations() {
        let mut r = BoundReport::default();
        assert!(r.check(BoundKind::Packing, 1, 0.5, 1.0));
        assert!(r.check(BoundKind::Packing, 2, 0.9, 1.0));
        assert!(!r.check(BoundKind::Packing, 3, 1.1, 1.0));
        let s = r.get(BoundKind::Packing).unwrap();
        assert_eq!((s.checks, s.violations, s.worst_step), (3, 1, 3));
        assert!((s.worst_ratio - 1.1).abs() < 1e-15);
        assert!(!r.is_clean());
    }

    #[test]
    fn zero_bound_uses_slack() {
        let mut r = BoundReport::default();
        assert!(r.check(BoundKind::PointwiseLinear, 1, 5e-11, 0.0));
        assert!(!r.check(BoundKind::PointwiseLinear, 2, 1e-9, 0.0));
    }
}
