//! Pivot selection strategies and the factorisation driver.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{observe, BoundContext, BoundReport, ConvergenceRecord, Guarantee};
use crate::cholesky::CholeskyState;
use crate::error::{Error, Result};
use crate::geometry::{dist, tensor_grid_with_cap, CandidateGrid, Domain, NearestPivotTracker, DEFAULT_GRID_CAP};
use crate::kernels::Kernel;
use crate::maxvol::improve_local_maxvol;

#[derive(Debug, Clone, PartialEq)]
pub enum PivotStrategy {
    /// Largest diagonal residual on the grid.
    Complete,
    /// Uniformly random (seeded) among points within factor δ of the maximum.
    DeltaComplete { delta: f64 },
    /// Cell-centred tensor points with `per_axis` points per axis, snapped to the grid.
    Uniform { per_axis: usize },
    /// Uniformly random among grid points with a nonzero residual.
    Random { seed: u64 },
    /// Complete pivoting followed by single-swap volume improvement at every size.
    LocalMaxVol { max_sweeps: usize },
}

impl PivotStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PivotStrategy::DeltaComplete { delta } if !(delta > 0.0 && delta <= 1.0) => {
                Err(Error::arg(format!("δ must lie in (0, 1], got {delta}")))
            }
            PivotStrategy::Uniform { per_axis: 0 } => Err(Error::arg("uniform pivoting needs m >= 1")),
            PivotStrategy::LocalMaxVol { max_sweeps: 0 } => Err(Error::arg("max-volume needs at least one sweep")),
            _ => Ok(()),
        }
    }

    fn guarantee(&self) -> Guarantee {
        match *self {
            PivotStrategy::Complete => Guarantee::Greedy { delta: 1.0 },
            PivotStrategy::DeltaComplete { delta } => Guarantee::Greedy { delta },
            PivotStrategy::LocalMaxVol { .. } => Guarantee::MaxVolume,
            PivotStrategy::Uniform { .. } | PivotStrategy::Random { .. } => Guarantee::Arbitrary,
        }
    }
}

impl FromStr for PivotStrategy {
    type Err = Error;

    /// `complete | delta:<δ> | uniform:<m> | random:<seed> | maxvol:<sweeps>`
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let need = |what: &str| arg.ok_or_else(|| Error::Parse(format!("strategy '{name}' needs {what}")));
        let bad = |e: &dyn fmt::Display| Error::Parse(format!("strategy '{s}': {e}"));
        let strategy = match name {
            "complete" => PivotStrategy::Complete,
            "delta" => PivotStrategy::DeltaComplete { delta: need("δ")?.parse().map_err(|e| bad(&e))? },
            "uniform" => PivotStrategy::Uniform { per_axis: need("m")?.parse().map_err(|e| bad(&e))? },
            "random" => PivotStrategy::Random { seed: need("a seed")?.parse().map_err(|e| bad(&e))? },
            "maxvol" => PivotStrategy::LocalMaxVol { max_sweeps: need("a sweep count")?.parse().map_err(|e| bad(&e))? },
            other => return Err(Error::Parse(format!("unknown strategy '{other}'"))),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

impl fmt::Display for PivotStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PivotStrategy::Complete => write!(f, "complete"),
            PivotStrategy::DeltaComplete { delta } => write!(f, "delta:{delta}"),
            PivotStrategy::Uniform { per_axis } => write!(f, "uniform:{per_axis}"),
            PivotStrategy::Random { seed } => write!(f, "random:{seed}"),
            PivotStrategy::LocalMaxVol { max_sweeps } => write!(f, "maxvol:{max_sweeps}"),
        }
    }
}

fn breakdown(state: &CholeskyState, value: f64) -> Error {
    Error::Breakdown { step: state.rank() + 1, value, tolerance: state.breakdown_threshold() }
}

/// Grid index of the largest diagonal residual.
pub fn select_complete(state: &CholeskyState) -> Result<usize> {
    let (i, v) = state.max_diag();
    if v <= state.breakdown_threshold() {
        return Err(breakdown(state, v));
    }
    Ok(i)
}

/// A random grid index whose residual is at least `δ` times the grid maximum.
pub fn select_delta_complete<R: Rng>(state: &CholeskyState, delta: f64, rng: &mut R) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::arg(format!("δ must lie in (0, 1], got {delta}")));
    }
    let max = state.residual_sup_norm();
    if max <= state.breakdown_threshold() {
        return Err(breakdown(state, max));
    }
    let threshold = delta * max;
    let admissible: Vec<usize> = state
        .diag_residual()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v >= threshold && v > state.breakdown_threshold())
        .map(|(i, _)| i)
        .collect();
    Ok(*admissible.choose(rng).expect("the maximiser is always admissible"))
}

/// Pivots picked without regard to the residual are admissible only above
/// this fraction of `‖R_n‖_∞`. A pivot of value `d` scales the roundoff in
/// each new column by about `√(‖R_n‖_∞/d)`, so tiny pivots of an otherwise
/// large residual drive the diagonal negative.
pub const CONDITIONING_FLOOR: f64 = 1e-3;

fn admissible_floor(state: &CholeskyState) -> f64 {
    state.breakdown_threshold().max(CONDITIONING_FLOOR * state.residual_sup_norm())
}

/// A random grid index among those above the conditioning floor.
pub fn select_random<R: Rng>(state: &CholeskyState, rng: &mut R) -> Result<usize> {
    let floor = admissible_floor(state);
    let admissible: Vec<usize> =
        state.diag_residual().iter().enumerate().filter(|&(_, &v)| v > floor).map(|(i, _)| i).collect();
    admissible.choose(rng).copied().ok_or_else(|| breakdown(state, state.residual_sup_norm()))
}

/// Cell-centred tensor points (`m` per axis) snapped to the nearest point of
/// a tensor grid, in coarse-to-fine order (see [`farthest_point_order`]).
pub fn uniform_pivots(grid: &CandidateGrid, per_axis: usize) -> Result<Vec<usize>> {
    let shape = grid.tensor_shape().ok_or_else(|| Error::arg("uniform pivoting needs a tensor candidate grid"))?;
    if per_axis == 0 {
        return Err(Error::arg("uniform pivoting needs m >= 1"));
    }
    let dim = grid.dim();
    let total = per_axis.checked_pow(dim as u32).filter(|&t| t <= grid.len());
    let total = total.ok_or_else(|| Error::arg(format!("{per_axis}^{dim} pivots exceed the grid")))?;
    let domain = &shape.domain;
    let mut out = Vec::with_capacity(total);
    let mut seen = HashSet::with_capacity(total);
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut rest = idx;
        for (a, xa) in x.iter_mut().enumerate() {
            let k = rest % per_axis;
            rest /= per_axis;
            let (lo, hi) = (domain.lower()[a], domain.upper()[a]);
            *xa = lo + (hi - lo) * (k as f64 + 0.5) / per_axis as f64;
        }
        let i = shape.nearest_index(&x);
        if !seen.insert(i) {
            return Err(Error::arg(format!("grid too coarse for {per_axis} uniform pivots per axis")));
        }
        out.push(i);
    }
    Ok(farthest_point_order(grid, &out, &domain.center()))
}

/// Reorders grid indices greedily: first the one nearest `start`, then
/// repeatedly the one farthest from those already taken (earliest on ties).
///
/// A fixed set factorised in lexicographic order puts neighbouring points
/// one after another, so for smooth kernels the pivot values collapse to
/// roundoff long before the set is exhausted.
pub fn farthest_point_order(grid: &CandidateGrid, indices: &[usize], start: &[f64]) -> Vec<usize> {
    if indices.is_empty() {
        return Vec::new();
    }
    let mut gap: Vec<f64> = indices.iter().map(|&i| dist(grid.point(i), start)).collect();
    let mut next = (0..indices.len()).min_by(|&a, &b| gap[a].total_cmp(&gap[b])).unwrap();
    let mut taken = vec![false; indices.len()];
    let mut out = Vec::with_capacity(indices.len());
    gap.iter_mut().for_each(|g| *g = f64::INFINITY);
    loop {
        taken[next] = true;
        out.push(indices[next]);
        let z = grid.point(indices[next]);
        let mut best: Option<(usize, f64)> = None;
        for (k, g) in gap.iter_mut().enumerate() {
            if taken[k] {
                continue;
            }
            *g = g.min(dist(grid.point(indices[k]), z));
            if best.is_none_or(|(_, b)| *g > b) {
                best = Some((k, *g));
            }
        }
        match best {
            Some((k, _)) => next = k,
            None => return out,
        }
    }
}

/// One factorisation experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernel: Kernel,
    pub domain: Domain,
    pub points_per_axis: usize,
    pub strategy: PivotStrategy,
    pub n_max: usize,
    /// Stop once `‖R_n‖_∞` falls to this value (never below the breakdown threshold).
    pub stop_tol: f64,
    /// Seed for δ-complete selection.
    pub seed: u64,
    pub grid_cap: usize,
    /// Fill `wall_time_ms`; off keeps traces byte-reproducible.
    pub timing: bool,
}

impl RunConfig {
    pub fn new(kernel: Kernel, domain: Domain, points_per_axis: usize, strategy: PivotStrategy, n_max: usize) -> Self {
        RunConfig {
            kernel,
            domain,
            points_per_axis,
            strategy,
            n_max,
            stop_tol: 0.0,
            seed: 0,
            grid_cap: DEFAULT_GRID_CAP,
            timing: false,
        }
    }

    fn build_grid(&self, m: usize) -> Result<CandidateGrid> {
        if self.kernel.dim() != self.domain.dim() {
            return Err(Error::arg("kernel and domain dimensions differ"));
        }
        tensor_grid_with_cap(&self.domain, m, self.grid_cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `n_max` steps taken.
    StepLimit,
    /// Residual fell to the stop tolerance.
    Converged,
    /// A predetermined pivot list ran out.
    PivotsExhausted,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: CholeskyState,
    pub records: Vec<ConvergenceRecord>,
    pub report: BoundReport,
    pub termination: Termination,
}

/// A failed run, with everything recorded before the failure.
#[derive(Debug, Clone)]
pub struct RunError {
    pub error: Error,
    pub records: Vec<ConvergenceRecord>,
    pub report: BoundReport,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} recorded steps)", self.error, self.records.len())
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        RunError { error, records: Vec::new(), report: BoundReport::default() }
    }
}

struct Recorder {
    ctx: BoundContext,
    records: Vec<ConvergenceRecord>,
    report: BoundReport,
    timing: bool,
}

impl Recorder {
    fn push(&mut self, state: &CholeskyState, tracker: &NearestPivotTracker, started: Instant) {
        let prev = self.records.last().map(|r| r.sup_residual);
        let ms = if self.timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let rec = observe(&self.ctx, state, tracker, prev, ms, &mut self.report);
        self.records.push(rec);
    }

    fn fail(self, error: Error) -> RunError {
        RunError { error, records: self.records, report: self.report }
    }
}

/// Runs the configured strategy for up to `n_max` steps, recording bounds at every step.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutput, RunError> {
    config.strategy.validate()?;
    let grid = Arc::new(config.build_grid(config.points_per_axis)?);
    if config.n_max > grid.len() {
        return Err(Error::arg(format!("n_max {} exceeds the {} grid points", config.n_max, grid.len())).into());
    }
    let mut state = CholeskyState::init(config.kernel.clone(), Arc::clone(&grid))?;
    let mut tracker = NearestPivotTracker::new(&grid);
    let nested = !matches!(config.strategy, PivotStrategy::LocalMaxVol { .. });
    let mut ctx = BoundContext::new(&state, &config.domain, config.strategy.guarantee(), nested);

    let mut uniform = Vec::new();
    if let PivotStrategy::Uniform { per_axis } = config.strategy {
        uniform = uniform_pivots(&grid, per_axis)?;
        if let Some(l) = ctx.diag_lipschitz {
            let width = dist(config.domain.lower(), config.domain.upper());
            ctx.tensor_target = Some((uniform.len(), 2.0 * l * width / per_axis as f64 + 4.0 * l * grid.spacing()));
        }
    }
    let mut uniform = uniform.into_iter();
    let seed = match config.strategy {
        PivotStrategy::Random { seed } => seed,
        _ => config.seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder { ctx, records: Vec::new(), report: BoundReport::default(), timing: config.timing };
    let stop = config.stop_tol.max(state.breakdown_threshold());
    let started = Instant::now();

    let mut termination = Termination::StepLimit;
    while state.rank() < config.n_max {
        if state.residual_sup_norm() <= stop {
            termination = Termination::Converged;
            break;
        }
        let choice = match config.strategy {
            PivotStrategy::Complete | PivotStrategy::LocalMaxVol { .. } => select_complete(&state),
            PivotStrategy::DeltaComplete { delta } => select_delta_complete(&state, delta, &mut rng),
            PivotStrategy::Random { .. } => select_random(&state, &mut rng),
            PivotStrategy::Uniform { .. } => {
                let floor = admissible_floor(&state);
                match uniform.by_ref().find(|&i| state.diag_residual()[i] > floor) {
                    Some(i) => Ok(i),
                    None => {
                        termination = Termination::PivotsExhausted;
                        break;
                    }
                }
            }
        };
        let idx = match choice {
            Ok(i) => i,
            Err(e) => return Err(rec.fail(e)),
        };
        // the tie window can reach below the floor once the sup is within 1e-12·K_max of it
        if state.diag_residual()[idx] <= state.breakdown_threshold() {
            termination = Termination::Converged;
            break;
        }
        if let Err(e) = state.step(idx) {
            return Err(rec.fail(e));
        }
        if let PivotStrategy::LocalMaxVol { max_sweeps } = config.strategy {
            match improve_local_maxvol(state, max_sweeps) {
                Ok(out) => state = out.state,
                Err(e) => return Err(rec.fail(e)),
            }
            tracker = NearestPivotTracker::from_indices(&grid, state.pivots()).map_err(RunError::from)?;
        } else if let Err(e) = tracker.add(&grid, grid.point(idx)) {
            return Err(rec.fail(e));
        }
        rec.push(&state, &tracker, started);
    }
    Ok(RunOutput { state, records: rec.records, report: rec.report, termination })
}

/// Complete pivoting that refines the tensor grid (`m → 2m − 1`) whenever
/// `4Lη > (1 − δ) max diag`, so every grid pick is a δ-approximate pivot for
/// the continuous domain. Pivots are kept and the state is refactorised.
pub fn refine_grid_run(config: &RunConfig, delta_target: f64) -> std::result::Result<RunOutput, RunError> {
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(Error::arg(format!("δ target must lie in (0, 1), got {delta_target}")).into());
    }
    let l = config
        .kernel
        .diag_lipschitz()
        .ok_or_else(|| Error::Config("grid refinement needs a certified diagonal Lipschitz constant".into()))?;
    let mut m = config.points_per_axis;
    let mut grid = Arc::new(config.build_grid(m)?);
    let mut state = CholeskyState::init(config.kernel.clone(), Arc::clone(&grid))?;
    let mut tracker = NearestPivotTracker::new(&grid);
    let ctx = BoundContext::new(&state, &config.domain, Guarantee::Greedy { delta: delta_target }, false);
    let mut rec = Recorder { ctx, records: Vec::new(), report: BoundReport::default(), timing: config.timing };
    let stop = config.stop_tol.max(state.breakdown_threshold());
    let started = Instant::now();

    let mut termination = Termination::StepLimit;
    while state.rank() < config.n_max {
        if state.residual_sup_norm() <= stop {
            termination = Termination::Converged;
            break;
        }
        while 4.0 * l * grid.spacing() > (1.0 - delta_target) * state.residual_sup_norm() {
            let finer = 2 * m - 1;
            let new_grid = match config.build_grid(finer) {
                Ok(g) => Arc::new(g),
                Err(e) => return Err(rec.fail(e)),
            };
            let old_shape = grid.tensor_shape().expect("tensor grid");
            let new_shape = new_grid.tensor_shape().expect("tensor grid");
            let pivots: Vec<usize> = state
                .pivots()
                .iter()
                .map(|&p| {
                    let multi: Vec<usize> = old_shape.multi_index(p).iter().map(|i| 2 * i).collect();
                    new_shape.flat_index(&multi)
                })
                .collect();
            state = match CholeskyState::from_pivots(config.kernel.clone(), Arc::clone(&new_grid), &pivots) {
                Ok(s) => s,
                Err(e) => return Err(rec.fail(e)),
            };
            tracker = NearestPivotTracker::from_indices(&new_grid, &pivots).map_err(RunError::from)?;
            grid = new_grid;
            m = finer;
        }
        let idx = match select_complete(&state) {
            Ok(i) => i,
            Err(e) => return Err(rec.fail(e)),
        };
        if let Err(e) = state.step(idx).and_then(|_| tracker.add(&grid, grid.point(idx))) {
            return Err(rec.fail(e));
        }
        rec.push(&state, &tracker, started);
    }
    Ok(RunOutput { state, records: rec.records, report: rec.report, termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tensor_grid;
    use crate::kernels::{KernelSpec, MaternNu};

    fn matern_half() -> Kernel {
        KernelSpec::Matern { nu: MaternNu::Half, lengthscale: 0.5 }.build_canonical(1).unwrap()
    }

    fn brownian() -> Kernel {
        KernelSpec::Brownian { shift: 1.0 }.build_canonical(1).unwrap()
    }

    fn line(m: usize) -> Arc<CandidateGrid> {
        Arc::new(tensor_grid(&Domain::cube(1, -1.0, 1.0).unwrap(), m).unwrap())
    }

    #[test]
    fn strategy_parsing_round_trips() {
        for s in ["complete", "delta:0.5", "uniform:7", "random:42", "maxvol:10"] {
            let parsed: PivotStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert!("delta:0".parse::<PivotStrategy>().is_err());
        assert!("delta:1.5".parse::<PivotStrategy>().is_err());
        assert!("delta".parse::<PivotStrategy>().is_err());
        assert!("rook".parse::<PivotStrategy>().is_err());
    }

    #[test]
    fn complete_first_steps() {
        let g = line(201);
        let mut s = CholeskyState::init(brownian(), Arc::clone(&g)).unwrap();
        let i = select_complete(&s).unwrap();
        assert_eq!(g.point(i), &[1.0]);
        s.step(i).unwrap();
        // (x+1) − (x+1)²/2 peaks at x = 0 with value 1/2
        let i = select_complete(&s).unwrap();
        assert_eq!(g.point(i), &[0.0]);
        assert!((s.diag_residual()[i] - 0.5).abs() < 1e-15);

        let s = CholeskyState::init(matern_half(), g).unwrap();
        assert_eq!(select_complete(&s).unwrap(), 0);
    }

    #[test]
    fn delta_one_picks_from_the_tie_set() {
        let g = line(101);
        let mut s = CholeskyState::init(matern_half(), g).unwrap();
        s.step(50).unwrap();
        let max = s.residual_sup_norm();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let i = select_delta_complete(&s, 1.0, &mut rng).unwrap();
            assert_eq!(s.diag_residual()[i], max);
        }
    }

    #[test]
    fn delta_on_constant_diagonal_can_pick_anything() {
        let s = CholeskyState::init(matern_half(), line(11)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [false; 11];
        for _ in 0..500 {
            seen[select_delta_complete(&s, 0.1, &mut rng).unwrap()] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn random_skips_zero_residuals() {
        let s = CholeskyState::init(brownian(), line(11)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_ne!(select_random(&s, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn uniform_pivots_are_cell_centred() {
        let g = line(201);
        let p = uniform_pivots(&g, 4).unwrap();
        let xs: Vec<f64> = p.iter().map(|&i| g.point(i)[0]).collect();
        // coarse to fine: nearest the centre first, then the farthest remaining
        assert_eq!(xs, vec![-0.25, 0.75, -0.75, 0.25]);
        assert!(uniform_pivots(&line(5), 6).is_err());
    }

    #[test]
    fn run_single_step_obeys_8lr() {
        let cfg = RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 2001, PivotStrategy::Complete, 1);
        let out = run(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].sup_residual <= 8.0 * 2.0 * 1.0);
        assert_eq!(out.termination, Termination::StepLimit);
    }

    #[test]
    fn run_complete_matern_obeys_all_bounds() {
        let cfg =
            RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 2001, PivotStrategy::Complete, 200);
        let out = run(&cfg).unwrap();
        assert_eq!(out.records.len(), 200);
        assert!(out.report.is_clean(), "{}", out.report);
        for r in &out.records {
            assert!(r.sup_residual <= r.bound_fill.unwrap() + 1e-10);
            assert!(r.sup_residual <= r.bound_pack.unwrap() + 1e-10);
        }
    }

    #[test]
    fn uniform_run_meets_tensor_bound() {
        let cfg = RunConfig::new(
            matern_half(),
            Domain::cube(1, -1.0, 1.0).unwrap(),
            2001,
            PivotStrategy::Uniform { per_axis: 25 },
            25,
        );
        let out = run(&cfg).unwrap();
        assert_eq!(out.records.len(), 25);
        let stat = out.report.get(crate::bounds::BoundKind::TensorUniform).unwrap();
        assert_eq!((stat.checks, stat.violations), (1, 0));
    }

    #[test]
    fn run_rejects_too_many_steps() {
        let cfg = RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 11, PivotStrategy::Complete, 12);
        assert!(matches!(run(&cfg), Err(RunError { error: Error::Argument(_), .. })));
    }

    #[test]
    fn gaussian_run_stops_at_tolerance() {
        let k = KernelSpec::Gaussian { sigma: 1.0 }.build_canonical(1).unwrap();
        let cfg = RunConfig::new(k, Domain::cube(1, -1.0, 1.0).unwrap(), 501, PivotStrategy::Complete, 100);
        let out = run(&cfg).unwrap();
        assert_eq!(out.termination, Termination::Converged);
        assert!(out.records.len() < 100);
    }

    #[test]
    fn refinement_keeps_delta_condition() {
        let cfg = RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 11, PivotStrategy::Complete, 40);
        let out = refine_grid_run(&cfg, 0.5).unwrap();
        assert_eq!(out.records.len(), 40);
        assert!(out.records.last().unwrap().grid_size > 11);
        for r in &out.records {
            assert!(8.0 * r.eta <= 0.5 * r.pivot_value + 1e-12);
        }
        assert!(out.report.is_clean(), "{}", out.report);
    }

    #[test]
    fn refinement_on_fine_grid_matches_plain_run() {
        let cfg = RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 4001, PivotStrategy::Complete, 10);
        let a = run(&cfg).unwrap();
        let b = refine_grid_run(&cfg, 0.5).unwrap();
        assert_eq!(a.state.pivots(), b.state.pivots());
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.sup_residual, y.sup_residual);
        }
    }

    #[test]
    fn refinement_hits_the_grid_cap() {
        let mut cfg =
            RunConfig::new(matern_half(), Domain::cube(1, -1.0, 1.0).unwrap(), 11, PivotStrategy::Complete, 200);
        cfg.grid_cap = 200;
        let err = refine_grid_run(&cfg, 0.5).unwrap_err();
        assert!(matches!(err.error, Error::Resource(_)));
    }
}
